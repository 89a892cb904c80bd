// Acceptance runner: one PASS/FAIL/SKIP line per criterion.
//
//   acceptance [--only N] [--eegmmidb DIR]
//
// The real-data check looks for S001R*.edf under --eegmmidb, then
// $EEGDGR_EEGMMIDB_DIR, then ./data/eegmmidb; it is skipped when none exist.

#include "eegdgr/csp.hpp"
#include "eegdgr/dataset.hpp"
#include "eegdgr/dgr.hpp"
#include "eegdgr/edf.hpp"
#include "eegdgr/frame.hpp"
#include "eegdgr/layers.hpp"
#include "eegdgr/linalg.hpp"
#include "eegdgr/metrics.hpp"
#include "eegdgr/model.hpp"
#include "eegdgr/transport.hpp"
#include "eegdgr/voting.hpp"
#include "support/edf_writer.hpp"
#include "support/oracles.hpp"
#include "support/trained.hpp"

#include <bit>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

using namespace eegdgr;
using testing::random_matrix;
using testing::rel_error;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status = Status::pass;
  std::string detail;
};

// Collects failed checks; the first few messages end up in the report.
class Checker {
 public:
  void require(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) messages_.push_back(what);
  }
  long checks() const { return checks_; }
  Outcome outcome(const std::string& summary) const {
    if (failures_ == 0) return {Status::pass, summary};
    std::string d = std::to_string(failures_) + "/" + std::to_string(checks_) + " checks failed";
    for (const auto& m : messages_) d += "; " + m;
    return {Status::fail, d};
  }

 private:
  long checks_ = 0;
  long failures_ = 0;
  std::vector<std::string> messages_;
};

std::string fmt(double v, int precision = 3) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// 1 -------------------------------------------------------------------------
Outcome csp_math() {
  Checker chk;
  SplitMix64 rng(101);
  double worst_white = 0, worst_resid = 0, worst_sum = 0;
  for (int m : {4, 14, 64}) {
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<Matrix> classes;
      Matrix composite = Matrix::Zero(m, m);
      for (int k = 0; k < 4; ++k) {
        classes.push_back(testing::random_spd(m, rng, 0.5));
        composite += classes.back();
      }
      const Matrix p = linalg::whitening(linalg::SymMatrix(composite));
      const double w = max_abs(p * composite * p.transpose() - Matrix::Identity(m, m));
      worst_white = std::max(worst_white, w);
      chk.require(w <= 1e-8, "whitening residual " + fmt(w) + " at M=" + std::to_string(m));

      std::vector<Matrix> whitened;
      for (const auto& c : classes) whitened.push_back(p * c * p.transpose());
      for (int k = 0; k < 4; ++k) {
        const Matrix& s = whitened[static_cast<std::size_t>(k)];
        const Matrix rest = Matrix::Identity(m, m) - s;
        const auto pair = linalg::gen_eig_sym(linalg::SymMatrix(s), linalg::SymMatrix(rest));
        for (int i = 0; i < m; ++i) {
          const Vector v = pair.vectors.col(i);
          const double r = (s * v - pair.values[i] * rest * v).norm() / std::max(1.0, v.norm() * std::max(1.0, pair.values[i]));
          worst_resid = std::max(worst_resid, r);
          chk.require(r <= 1e-8, "generalized residual " + fmt(r) + " at M=" + std::to_string(m));
        }
      }
      // Common basis: eigenvectors of the first whitened class.
      const Matrix u = linalg::sym_eig(linalg::SymMatrix(whitened[0])).vectors;
      Matrix lambda_sum = Matrix::Zero(m, m);
      for (const auto& s : whitened) lambda_sum += u.transpose() * s * u;
      const double e = max_abs(lambda_sum - Matrix::Identity(m, m));
      worst_sum = std::max(worst_sum, e);
      chk.require(e <= 1e-6, "eigenvalue sum deviates by " + fmt(e) + " at M=" + std::to_string(m));
    }
    // Two classes share eigenvectors; their eigenvalues pair up to 1.
    const Matrix c1 = testing::random_spd(m, rng, 0.5);
    const Matrix c2 = testing::random_spd(m, rng, 0.5);
    const Matrix p = linalg::whitening(linalg::SymMatrix(c1 + c2));
    const Vector l1 = linalg::sym_eig(linalg::SymMatrix(p * c1 * p.transpose())).values;
    const Vector l2 = linalg::sym_eig(linalg::SymMatrix(p * c2 * p.transpose())).values;
    const double e2 = (l1 + l2.reverse() - Vector::Ones(m)).cwiseAbs().maxCoeff();
    worst_sum = std::max(worst_sum, e2);
    chk.require(e2 <= 1e-6, "two-class eigenvalues do not sum to 1 at M=" + std::to_string(m));

    // Same invariants through the CSP fit on epochs.
    std::vector<Epoch> epochs;
    for (int k = 1; k <= 4; ++k) {
      const Matrix mix = random_matrix(m, m, rng) + 2.0 * Matrix::Identity(m, m);
      for (int i = 0; i < 6; ++i) epochs.push_back({mix * random_matrix(m, 2 * m, rng), k});
    }
    csp::CspFitDetail detail;
    csp::fit_csp(epochs, 4, &detail);
    Matrix sum = Matrix::Zero(m, m);
    for (const auto& s : detail.whitened) sum += s;
    chk.require(max_abs(sum - Matrix::Identity(m, m)) <= 1e-8, "fit whitened sum at M=" + std::to_string(m));
  }
  return chk.outcome("whitening " + fmt(worst_white) + ", residual " + fmt(worst_resid) + ", sum " + fmt(worst_sum));
}

// 2 -------------------------------------------------------------------------
Outcome gradients() {
  Checker chk;
  SplitMix64 rng(202);
  double worst = 0.0;
  auto check = [&](double analytic, double numeric, double tol, const std::string& what) {
    const double e = rel_error(analytic, numeric);
    worst = std::max(worst, tol == 1e-6 ? e : 0.0);
    chk.require(e <= tol, what + " rel error " + fmt(e));
  };

  {
    net::ConvLayer c;
    c.filters = random_matrix(3, 4, rng) * 0.5;
    c.bias = random_matrix(3, 1, rng).col(0) * 0.1;
    Matrix x = random_matrix(4, 5, rng);
    net::FeatureMap up = net::conv2d_forward(c, x);
    up.values = random_matrix(up.values.size(), 1, rng).col(0);
    auto loss = [&] { return net::conv2d_forward(c, x).values.dot(up.values); };
    const auto g = net::conv2d_backward(c, x, net::conv2d_forward(c, x), up);
    for (Eigen::Index i = 0; i < c.filters.size(); ++i) check(g.grad_filters.data()[i], testing::central_diff(loss, c.filters.data()[i]), 1e-6, "conv filter");
    for (Eigen::Index i = 0; i < c.bias.size(); ++i) check(g.grad_bias[i], testing::central_diff(loss, c.bias[i]), 1e-6, "conv bias");
    for (Eigen::Index i = 0; i < x.size(); ++i) check(g.grad_input.data()[i], testing::central_diff(loss, x.data()[i]), 1e-6, "conv input");
  }
  for (auto act : {net::Activation::tanh, net::Activation::none}) {
    net::DenseLayer d;
    d.weights = random_matrix(4, 6, rng);
    d.bias = random_matrix(4, 1, rng).col(0);
    d.activation = act;
    Matrix x = random_matrix(6, 3, rng);
    const Matrix u = random_matrix(4, 3, rng);
    auto loss = [&] { return (net::dense_forward(d, x).array() * u.array()).sum(); };
    const auto g = net::dense_backward(d, x, net::dense_forward(d, x), u);
    for (Eigen::Index i = 0; i < d.weights.size(); ++i) check(g.grad_weights.data()[i], testing::central_diff(loss, d.weights.data()[i]), 1e-6, "dense weight");
    for (Eigen::Index i = 0; i < d.bias.size(); ++i) check(g.grad_bias[i], testing::central_diff(loss, d.bias[i]), 1e-6, "dense bias");
    for (Eigen::Index i = 0; i < x.size(); ++i) check(g.grad_input.data()[i], testing::central_diff(loss, x.data()[i]), 1e-6, "dense input");
  }
  for (int rep = 0; rep < 8; ++rep) {
    Vector logits = random_matrix(4, 1, rng).col(0) * 2.0;
    const int target = rep % 4;
    const auto r = net::softmax_xent(net::softmax(logits), target);
    auto loss = [&] { return net::softmax_xent(net::softmax(logits), target).loss; };
    for (int k = 0; k < 4; ++k) check(r.grad_logits[k], testing::central_diff(loss, logits[k]), 1e-6, "softmax+xent");
  }
  for (int m : {3, 6}) {
    Matrix raw = dgr::project_adjacency(random_matrix(m, m, rng)).matrix();
    Matrix e = random_matrix(m, 7, rng);
    const Matrix u = random_matrix(m, 7, rng);
    auto loss = [&] { return (u.array() * dgr::dgr_forward(dgr::project_adjacency(raw), e).array()).sum(); };
    const auto g = dgr::dgr_grad(dgr::project_adjacency(raw), e, u);
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        const double saved = raw(i, j);
        auto along = [&](double h) {
          raw(i, j) = raw(j, i) = saved + h;
          const double v = loss();
          raw(i, j) = raw(j, i) = saved;
          return v;
        };
        check(2.0 * g.grad_adj(i, j), (along(1e-5) - along(-1e-5)) / 2e-5, 1e-6, "dgr adjacency");
      }
    }
    for (Eigen::Index i = 0; i < e.size(); ++i) check(g.grad_input.data()[i], testing::central_diff(loss, e.data()[i]), 1e-6, "dgr input");
  }

  // Tiny model end to end: M=3, L=4, D=2, D'=5, K=4.
  csp::CspModel c;
  c.w = random_matrix(3, 3, rng);
  c.num_channels = 3;
  c.class_order = {1, 2, 3, 4};
  for (int k = 0; k < 4; ++k) c.per_class_eigvals.push_back(Vector::LinSpaced(3, 1.0, 0.1));
  net::TrainConfig cfg;
  cfg.conv_depth = 2;
  cfg.hidden = 5;
  net::ClassifierModel model = net::init_model({Vector::Zero(3), Vector::Ones(3)}, c, 4, 4, cfg);
  Matrix adj = random_matrix(3, 3, rng) * 0.3;
  model.adjacency = dgr::project_adjacency(adj);
  adj = model.adjacency.matrix();
  model.conv.bias = random_matrix(2, 1, rng).col(0) * 0.1;
  model.fc_hidden.bias = random_matrix(5, 1, rng).col(0) * 0.1;
  model.fc_out.bias = random_matrix(4, 1, rng).col(0) * 0.1;
  std::vector<Matrix> inputs;
  for (int b = 0; b < 3; ++b) inputs.push_back(random_matrix(3, 4, rng));
  const std::vector<int> labels{2, 4, 1};
  net::Gradients g;
  net::batch_loss(model, inputs, labels, &g, nullptr);
  auto loss = [&] { return net::batch_loss(model, inputs, labels, nullptr, nullptr); };
  auto all = [&](auto& param, const auto& grad, const char* what) {
    for (Eigen::Index i = 0; i < param.size(); ++i) check(grad.data()[i], testing::central_diff(loss, param.data()[i]), 1e-5, what);
  };
  all(model.conv.filters, g.conv_filters, "model conv filter");
  all(model.conv.bias, g.conv_bias, "model conv bias");
  all(model.fc_hidden.weights, g.hidden_weights, "model hidden weight");
  all(model.fc_hidden.bias, g.hidden_bias, "model hidden bias");
  all(model.fc_out.weights, g.out_weights, "model output weight");
  all(model.fc_out.bias, g.out_bias, "model output bias");
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      auto along = [&](double h) {
        Matrix a = adj;
        a(i, j) = a(j, i) = adj(i, j) + h;
        model.adjacency = dgr::project_adjacency(a);
        const double v = loss();
        model.adjacency = dgr::project_adjacency(adj);
        return v;
      };
      check(2.0 * g.adjacency(i, j), (along(1e-5) - along(-1e-5)) / 2e-5, 1e-5, "model adjacency");
    }
  }
  return chk.outcome(std::to_string(chk.checks()) + " derivatives, worst layer rel error " + fmt(worst));
}

// 3 -------------------------------------------------------------------------
Outcome synthetic_end_to_end() {
  Checker chk;
  const auto& t = testing::trained_synthetic();
  const auto& r = t.result;
  const double acc = net::accuracy(r.model, t.split.test);
  chk.require(t.spec.channels == 14 && t.spec.window == 16, "generator shape");
  chk.require(t.spec.classes * t.spec.epochs_per_class == 400, "generator size");
  chk.require(r.history.size() <= 100, "trained past 100 epochs");
  chk.require(r.model.hyper.learning_rate == 0.0005 && r.model.hyper.conv_depth == 10 && r.model.hyper.hidden == 120,
              "non-default hyperparameters");
  chk.require(acc >= 0.95, "test accuracy " + fmt(acc, 4));
  return chk.outcome("test accuracy " + fmt(acc, 4) + " at epoch " + std::to_string(r.best_epoch) + " of " +
                     std::to_string(r.history.size()));
}

// 4 -------------------------------------------------------------------------
std::optional<std::filesystem::path> eegmmidb_dir(const std::string& flag) {
  std::vector<std::filesystem::path> candidates;
  if (!flag.empty()) candidates.emplace_back(flag);
  if (const char* env = std::getenv("EEGDGR_EEGMMIDB_DIR")) candidates.emplace_back(env);
  candidates.emplace_back("data/eegmmidb");
  for (const auto& base : candidates) {
    for (const auto& dir : {base, base / "S001"}) {
      if (std::filesystem::exists(dir / "S001R04.edf")) return dir;
    }
  }
  return std::nullopt;
}

Outcome real_data(const std::string& flag) {
  const auto dir = eegmmidb_dir(flag);
  if (!dir) return {Status::skip, "no eegmmidb S001 recordings found"};
  DatasetSpec spec;
  spec.kind = DatasetKind::edf_dir;
  spec.path = *dir;
  spec.subject = "S001";
  spec.window = 64;
  spec.overlap = 0.5;
  try {
    const Dataset ds = load_dataset(spec);
    const SplitResult split = split_and_batch(ds.epochs, {});
    net::TrainConfig cfg;
    cfg.epochs = 5;
    const auto r = net::train_model(split.train_batches, split.test, cfg);
    const double acc = net::accuracy(r.model, split.test);
    Checker chk;
    chk.require(acc > 0.25, "test accuracy " + fmt(acc, 4) + " does not beat chance");
    return chk.outcome(std::to_string(ds.epochs.size()) + " epochs from " + std::to_string(ds.files.size()) +
                       " files, test accuracy " + fmt(acc, 4));
  } catch (const std::exception& e) {
    return {Status::fail, e.what()};
  }
}

// 5 -------------------------------------------------------------------------
struct VoteSearch {
  Checker& chk;
  std::vector<int> seq;
  long visited = 0;

  void descend(const stream::DecisionWindow& window, std::size_t since, int remaining) {
    for (int c = 1; c <= 4; ++c) {
      stream::DecisionWindow w = window;
      seq.push_back(c);
      const std::size_t t = seq.size() - 1;
      const auto got = w.update(c);
      // Recount the last ten predictions made since the previous decision.
      const std::size_t begin = std::max(since, t + 1 >= 10 ? t + 1 - 10 : std::size_t{0});
      std::optional<int> expected;
      for (int k = 1; k <= 4; ++k) {
        if (std::count(seq.begin() + static_cast<std::ptrdiff_t>(begin), seq.end(), k) >= 7) expected = k;
      }
      ++visited;
      if (got.has_value() != expected.has_value() || (got && got->class_id != *expected)) {
        std::string s;
        for (int v : seq) s += std::to_string(v);
        chk.require(false, "mismatch after " + s);
      }
      if (remaining > 1) descend(w, expected ? t + 1 : since, remaining - 1);
      seq.pop_back();
    }
  }
};

Outcome voting_oracle() {
  Checker chk;
  VoteSearch search{chk, {}, 0};
  search.seq.reserve(12);
  search.descend(stream::DecisionWindow(4), 0, 12);
  chk.require(search.visited == (std::int64_t{1} << 26) / 3 - 1, "visited " + std::to_string(search.visited));
  return chk.outcome("all " + std::to_string(search.visited) + " sequences of length 1..12 agree");
}

// 6 -------------------------------------------------------------------------
float random_float(SplitMix64& rng) {
  if (rng.below(4) == 0) return std::bit_cast<float>(static_cast<std::uint32_t>(rng.next()));
  return static_cast<float>(rng.normal());
}

stream::Frame random_frame(SplitMix64& rng) {
  using namespace stream;
  switch (rng.below(4)) {
    case 0: {
      SampleFrame s;
      s.values.resize(rng.below(70));
      for (auto& v : s.values) v = random_float(rng);
      return s;
    }
    case 1:
      return DecisionFrame{static_cast<std::uint16_t>(rng.next()), random_float(rng),
                           static_cast<std::uint16_t>(rng.next()), rng.next()};
    case 2:
      return HelloFrame{static_cast<std::uint8_t>(rng.next()), static_cast<std::uint16_t>(rng.next()),
                        random_float(rng)};
    default: {
      ErrorFrame e;
      e.code = static_cast<ErrorCode>(1 + rng.below(5));
      e.message.resize(rng.below(40));
      for (auto& ch : e.message) ch = static_cast<char>(rng.next());
      return e;
    }
  }
}

Outcome protocol() {
  using namespace stream;
  Checker chk;
  SplitMix64 rng(606);
  for (int i = 0; i < 100000; ++i) {
    const Frame f = random_frame(rng);
    bool ok = false;
    try {
      ok = decode_frame(encode_frame(f)) == f;
    } catch (const std::exception&) {
    }
    chk.require(ok, "round trip of a " + std::string(kind_name(kind_of(f))) + " frame");
  }
  long rejected = 0;
  for (int i = 0; i < 100000; ++i) {
    std::vector<std::uint8_t> bytes(rng.below(64));
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.next());
    if (!bytes.empty() && rng.below(2)) bytes[0] = kFrameMagic;
    if (bytes.size() > 1 && rng.below(2)) bytes[1] = kWireVersion;
    try {
      decode_frame(bytes);
    } catch (const FrameError&) {
      ++rejected;
    } catch (const std::exception& e) {
      chk.require(false, std::string("fuzz input escaped as ") + e.what());
    }
  }

  const auto& t = testing::trained_synthetic();
  ServerConfig cfg;
  cfg.max_sessions = 1;
  AuditLog audit;
  Server server(t.result.model, cfg, &audit);
  server.bind();
  std::thread loop([&] { server.run(); });
  SimulateOptions opts;
  opts.port = server.port();
  const Recording rec = synthetic::synthetic_recording(t.spec, {2}, 512, 66);
  SimulateResult r;
  try {
    r = simulate(rec, opts);
  } catch (const std::exception& e) {
    chk.require(false, std::string("simulate: ") + e.what());
    server.stop();
  }
  loop.join();
  chk.require(!r.error.has_value(), "server rejected the session");
  chk.require(!r.decisions.empty() && r.decisions.front().class_id == 2, "planted class 2 not decided first");
  int agree = 0;
  for (const auto& d : r.decisions) agree += d.class_id == 2;
  chk.require(agree * 2 > static_cast<int>(r.decisions.size()), "planted class is not the majority decision");
  chk.require(audit.events().size() == r.decisions.size(), "server and client disagree on decision count");
  return chk.outcome("1e5 round trips, " + std::to_string(rejected) + "/100000 fuzz inputs rejected cleanly, loopback " +
                     std::to_string(agree) + "/" + std::to_string(r.decisions.size()) + " decisions = class 2");
}

// 7 -------------------------------------------------------------------------
Outcome edf_parser() {
  Checker chk;
  testing::FixtureFile f;
  f.num_records = 3;
  f.record_duration_s = 0.5;
  SplitMix64 rng(707);
  for (int s = 0; s < 3; ++s) {
    testing::FixtureSignal sig;
    sig.label = "Ch" + std::to_string(s);
    sig.samples_per_record = 6;
    sig.physical_min = -100.0 - s;
    sig.physical_max = 250.0 + s;
    sig.digital_min = -32768;
    sig.digital_max = 32767;
    for (int i = 0; i < 3 * sig.samples_per_record; ++i) sig.digital.push_back(static_cast<std::int16_t>(rng.next()));
    f.signals.push_back(sig);
  }
  const auto bytes = testing::write_edf(f);
  const auto header = edf::parse_edf_header(bytes);
  const auto digital = edf::decode_digital(bytes, header);
  const Recording rec = edf::read_signal_data(bytes, header);
  for (std::size_t s = 0; s < 3; ++s) {
    const auto& sig = f.signals[s];
    chk.require(digital[s].size() == sig.digital.size(), "sample count of " + sig.label);
    bool exact = true;
    for (std::size_t i = 0; i < std::min(digital[s].size(), sig.digital.size()); ++i) exact &= digital[s][i] == sig.digital[i];
    chk.require(exact, "digital samples of " + sig.label + " differ");
  }
  const auto& h0 = header.signals[0];
  double worst = 0.0;
  for (std::size_t i = 0; i < f.signals[0].digital.size(); ++i) {
    const int d = f.signals[0].digital[i];
    const double expected = h0.physical_min + (d - h0.digital_min) * (h0.physical_max - h0.physical_min) /
                                                  static_cast<double>(h0.digital_max - h0.digital_min);
    worst = std::max(worst, std::abs(rec.data(0, static_cast<Eigen::Index>(i)) - expected));
  }
  chk.require(worst <= 1e-12, "physical values off by " + fmt(worst));

  edf::SignalHeader sh;
  sh.physical_min = -1.0;
  sh.physical_max = 1.0;
  sh.digital_min = -32768;
  sh.digital_max = 32767;
  const double zero = sh.to_physical(0);
  chk.require(std::abs(zero - 1.0 / 65535.0) <= 1e-12, "digital 0 maps to " + fmt(zero, 17));
  chk.require(sh.to_physical(-32768) == -1.0, "digital_min is not physical_min");

  auto tal = [](std::string_view s) {
    ParseReport report;
    auto out = edf::parse_tal(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()), &report);
    return std::make_pair(out, report);
  };
  using namespace std::string_view_literals;
  chk.require(tal("+0\x14\x14\x00"sv).first.empty(), "timekeeping record emitted an event");
  const auto [one, r1] = tal("+4.2\x15\x15" "4.1\x14T1\x14\x00"sv);
  chk.require(one.size() == 1 && one[0] == Annotation{4.2, 4.1, "T1"}, "onset/duration/text fixture");
  const auto [bad, r2] = tal("+x\x14T0\x14\x00+1\x14T2\x14\x00"sv);
  chk.require(bad.size() == 1 && bad[0].text == "T2" && r2.skipped_annotations == 1, "malformed onset not skipped");
  return chk.outcome("3-signal fixture bit-exact, digital 0 -> " + fmt(zero, 12) + ", TAL fixtures parsed");
}

// 8 -------------------------------------------------------------------------
Outcome metrics_oracle() {
  Checker chk;
  SplitMix64 rng(808);
  double worst = 0.0;
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<Vector> rows;
    std::vector<int> labels;
    const bool coarse = rep % 2 == 0;
    for (int i = 0; i < 30; ++i) {
      Vector r(4);
      for (int k = 0; k < 4; ++k) r[k] = coarse ? std::floor(rng.uniform() * 6.0) + 1.0 : rng.uniform() + 1e-3;
      rows.push_back(r / r.sum());
      labels.push_back(1 + static_cast<int>(rng.below(4)));
    }
    const auto roc = metrics::roc_auc_ovr(rows, labels, 4);
    for (int k = 1; k <= 4; ++k) {
      std::vector<double> scores;
      std::vector<bool> pos;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        scores.push_back(rows[i][k - 1]);
        pos.push_back(labels[i] == k);
      }
      const auto oracle = testing::pairwise_auc(scores, pos);
      const auto& got = roc.per_class[static_cast<std::size_t>(k - 1)].auc;
      chk.require(oracle.has_value() == got.has_value(), "AUC definedness");
      if (oracle && got) {
        worst = std::max(worst, std::abs(*oracle - *got));
        chk.require(std::abs(*oracle - *got) <= 1e-12, "AUC differs from the pairwise oracle");
      }
    }
    std::vector<int> preds;
    std::vector<long> per_label(4, 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      preds.push_back(1 + static_cast<int>(rng.below(4)));
      ++per_label[static_cast<std::size_t>(labels[i] - 1)];
    }
    const auto cm = metrics::confusion_matrix(preds, labels, 4);
    for (std::size_t k = 0; k < 4; ++k) {
      long row = 0;
      for (long v : cm.counts[k]) row += v;
      chk.require(row == per_label[k], "confusion row sum");
    }
  }
  return chk.outcome("500 instances of 30 rows, max AUC deviation " + fmt(worst));
}

// 9 -------------------------------------------------------------------------
Outcome latency() {
  Checker chk;
  const int m = 64, l = 64;
  SplitMix64 rng(909);
  csp::CspModel c;
  c.w = random_matrix(m, m, rng);
  c.num_channels = m;
  for (int k = 1; k <= 4; ++k) {
    c.class_order.push_back(k);
    c.per_class_eigvals.push_back(Vector::LinSpaced(m, 1.0, 0.01));
  }
  const net::ClassifierModel model = net::init_model({Vector::Zero(m), Vector::Ones(m)}, c, l, 4, {});
  const Matrix epoch = random_matrix(m, l, rng);
  Matrix features;
  Vector probs;
  const double rate = 160.0;
  const std::vector<metrics::Stage> stages{
      {"acquisition", nullptr, l / rate},
      {"csp+dgr", [&] { features = net::graph_features(model, epoch); }, std::nullopt},
      {"cnn", [&] { probs = net::cnn_probabilities(model, features); }, std::nullopt},
  };
  const auto rep = metrics::latency_probe(stages, 20);
  chk.require(rep.stages.size() == 3, "stage count");
  const char* names[] = {"acquisition", "csp+dgr", "cnn"};
  double sum = 0.0;
  for (std::size_t i = 0; i < std::min<std::size_t>(3, rep.stages.size()); ++i) {
    chk.require(rep.stages[i].name == names[i], "stage " + std::to_string(i) + " is " + rep.stages[i].name);
    chk.require(std::isfinite(rep.stages[i].mean_s) && rep.stages[i].mean_s >= 0.0, "stage time");
    chk.require(rep.stages[i].p95_s >= 0.0 && rep.stages[i].samples_s.size() == 20, "stage samples");
    sum += rep.stages[i].mean_s;
  }
  chk.require(rep.total.mean_s >= sum - 1e-6, "total below the sum of stages");
  chk.require(probs.size() == 4 && std::abs(probs.sum() - 1.0) < 1e-9, "probe output");
  std::ostringstream d;
  for (const auto& s : rep.stages) d << s.name << " " << fmt(s.mean_s * 1e3) << " ms, ";
  d << "total " << fmt(rep.total.mean_s * 1e3) << " ms (M=64, L=64)";
  return chk.outcome(d.str());
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;  // 0: no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  std::string eeg_dir;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (a == "--eegmmidb" && i + 1 < argc) {
      eeg_dir = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--only N] [--eegmmidb DIR]\n";
      return 2;
    }
  }

  const std::vector<Criterion> criteria{
      {1, "csp-math", 10, csp_math},
      {2, "gradients", 30, gradients},
      {3, "synthetic-end-to-end", 300, synthetic_end_to_end},
      {4, "real-data-smoke", 0, [&] { return real_data(eeg_dir); }},
      {5, "voting-oracle", 60, voting_oracle},
      {6, "protocol", 60, protocol},
      {7, "edf-parser", 0, edf_parser},
      {8, "metrics-oracle", 0, metrics_oracle},
      {9, "latency-report", 0, latency},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (only && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Status::fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.status == Status::pass && c.limit_s > 0 && secs > c.limit_s) {
      o = {Status::fail, "took " + fmt(secs) + " s, limit " + fmt(c.limit_s) + " s; " + o.detail};
    }
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    failed += o.status == Status::fail;
    std::cout << tag << " " << c.id << " " << c.name << " (" << std::fixed << std::setprecision(2) << secs
              << " s): " << std::defaultfloat << o.detail << std::endl;
  }
  return failed ? 1 : 0;
}
