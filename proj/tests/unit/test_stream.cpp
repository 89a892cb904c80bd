#include <doctest.h>

#include "eegdgr/dispatch.hpp"
#include "eegdgr/frame.hpp"
#include "eegdgr/session.hpp"
#include "eegdgr/transport.hpp"
#include "eegdgr/voting.hpp"
#include "support/oracles.hpp"
#include "support/trained.hpp"

#include <bit>
#include <cstring>
#include <sstream>
#include <thread>

using namespace eegdgr;
using namespace eegdgr::stream;

namespace {

float random_float(SplitMix64& rng) {
  if (rng.below(4) == 0) return std::bit_cast<float>(static_cast<std::uint32_t>(rng.next()));
  return static_cast<float>(rng.normal());
}

Frame random_frame(SplitMix64& rng) {
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
      for (auto& c : e.message) c = static_cast<char>(rng.next());
      return e;
    }
  }
}

FrameErrorKind decode_error(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_frame(bytes);
  } catch (const FrameError& e) {
    return e.kind();
  }
  FAIL("expected FrameError");
  return FrameErrorKind::truncated_header;
}

Recording planted(int class_id, int samples, std::uint64_t seed) {
  const auto& t = testing::trained_synthetic();
  return synthetic::synthetic_recording(t.spec, {class_id}, samples, seed);
}

}  // namespace

TEST_CASE("frames round-trip") {
  SplitMix64 rng(1);
  FrameReader reader;
  for (int i = 0; i < 100000; ++i) {
    const Frame f = random_frame(rng);
    const auto bytes = encode_frame(f);
    REQUIRE(decode_frame(bytes) == f);
    if (i % 10 == 0) {
      // Split delivery through the incremental reader.
      const std::size_t cut = rng.below(bytes.size() + 1);
      reader.feed(std::span(bytes).first(cut));
      if (cut < bytes.size()) CHECK_FALSE(reader.next().has_value());
      reader.feed(std::span(bytes).subspan(cut));
      const auto got = reader.next();
      REQUIRE(got.has_value());
      CHECK(*got == f);
    }
  }
  CHECK(reader.buffered() == 0);
}

TEST_CASE("frame layout") {
  const auto bytes = encode_frame(SampleFrame{{1.0f, -2.0f}});
  REQUIRE(bytes.size() == 7 + 2 + 8);
  CHECK(bytes[0] == 0xB2);
  CHECK(bytes[1] == 0x01);
  CHECK(bytes[2] == 1);
  CHECK(bytes[3] == 10);
  CHECK(bytes[4] == 0);
  CHECK(bytes[7] == 2);
  CHECK(bytes[8] == 0);
  float one = 0.0f;
  std::memcpy(&one, bytes.data() + 9, 4);
  CHECK(one == 1.0f);
  CHECK(encode_frame(DecisionFrame{}).size() == 7 + 16);
  CHECK(encode_frame(HelloFrame{}).size() == 7 + 7);
}

TEST_CASE("frame decode diagnostics") {
  auto good = encode_frame(DecisionFrame{3, 0.9f, 8, 42});
  CHECK(decode_error({0xB2, 0x01}) == FrameErrorKind::truncated_header);
  auto magic = good;
  magic[0] = 0xB3;
  CHECK(decode_error(magic) == FrameErrorKind::bad_magic);
  auto version = good;
  version[1] = 0x02;
  CHECK(decode_error(version) == FrameErrorKind::bad_version);
  auto kind = good;
  kind[2] = 9;
  CHECK(decode_error(kind) == FrameErrorKind::unknown_kind);
  auto truncated = good;
  truncated.pop_back();
  CHECK(decode_error(truncated) == FrameErrorKind::length_mismatch);
  auto trailing = good;
  trailing.push_back(0);
  CHECK(decode_error(trailing) == FrameErrorKind::length_mismatch);
  auto huge = good;
  huge[3] = 0;
  huge[4] = 0;
  huge[5] = 0x20;
  huge[6] = 0;
  CHECK(decode_error(huge) == FrameErrorKind::payload_too_large);
  // Declared sample count disagrees with the payload.
  auto sample = encode_frame(SampleFrame{{1.0f, 2.0f}});
  sample[7] = 3;
  CHECK(decode_error(sample) == FrameErrorKind::length_mismatch);
}

TEST_CASE("fuzzed input never escapes as anything but FrameError") {
  SplitMix64 rng(2);
  int rejected = 0;
  for (int i = 0; i < 100000; ++i) {
    std::vector<std::uint8_t> bytes(rng.below(64));
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.next());
    if (!bytes.empty() && rng.below(2)) bytes[0] = kFrameMagic;
    if (bytes.size() > 1 && rng.below(2)) bytes[1] = kWireVersion;
    try {
      decode_frame(bytes);
    } catch (const FrameError&) {
      ++rejected;
    }
    FrameReader r;
    r.feed(bytes);
    try {
      while (r.next()) {
      }
    } catch (const FrameError&) {
    }
  }
  CHECK(rejected > 0);
}

TEST_CASE("vote window basics") {
  DecisionWindow w(4);
  for (int i = 0; i < 6; ++i) CHECK_FALSE(w.update(2).has_value());
  const auto d = w.update(2, 0.5);
  REQUIRE(d.has_value());
  CHECK(d->class_id == 2);
  CHECK(d->votes == 7);
  CHECK(d->confidence == doctest::Approx((6.0 + 0.5) / 7.0));
  CHECK(w.size() == 0);

  DecisionWindow mixed(4);
  for (int i = 0; i < 30; ++i) CHECK_FALSE(mixed.update(1 + i % 2).has_value());
  CHECK(mixed.size() == 10);
  CHECK(mixed.count(1) == 5);
  CHECK_THROWS_AS(mixed.update(5), VotingError);
  CHECK_THROWS_AS(mixed.update(0), VotingError);
}

TEST_CASE("vote window agrees with the brute-force recount") {
  // Exhaustive over every 4-class sequence of length 8, sampled above that.
  std::vector<int> seq(8);
  for (int code = 0; code < (1 << 16); ++code) {
    for (int i = 0; i < 8; ++i) seq[static_cast<std::size_t>(i)] = 1 + ((code >> (2 * i)) & 3);
    const auto oracle = testing::brute_force_votes(seq);
    DecisionWindow w(4);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const auto d = w.update(seq[i]);
      REQUIRE(d.has_value() == oracle[i].has_value());
      if (d) REQUIRE(d->class_id == *oracle[i]);
    }
  }
  SplitMix64 rng(3);
  for (int rep = 0; rep < 20000; ++rep) {
    std::vector<int> s(9 + rng.below(40));
    // Bias towards one class so decisions fire often.
    const int fav = 1 + static_cast<int>(rng.below(4));
    for (auto& p : s) p = rng.below(3) ? fav : 1 + static_cast<int>(rng.below(4));
    const auto oracle = testing::brute_force_votes(s);
    DecisionWindow w(4);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto d = w.update(s[i]);
      REQUIRE(d.has_value() == oracle[i].has_value());
      if (d) REQUIRE(d->class_id == *oracle[i]);
    }
  }
}

TEST_CASE("dispatch") {
  const Catalog cat = default_catalog();
  CHECK(dispatch(4, cat).object == "PinkiePie");
  CHECK(dispatch(1, cat).object == "Mario");
  CHECK_THROWS_AS(dispatch(9, cat), DispatchError);

  std::ostringstream out;
  DispatchLog log(&out);
  for (int i = 0; i < 1000; ++i) dispatch(1 + i % 4, cat, &log);
  const auto recs = log.records();
  REQUIRE(recs.size() == 1000);
  for (std::size_t i = 1; i < recs.size(); ++i) CHECK(recs[i].timestamp_us > recs[i - 1].timestamp_us);
  std::istringstream lines(out.str());
  std::string first;
  std::getline(lines, first);
  CHECK(first.find("\"Mario\"") != std::string::npos);

  const Catalog parsed = parse_catalog(R"({"2": {"object": "car", "model": "m/car.stl"}})");
  CHECK(parsed.at(2).object == "car");
  CHECK(parsed.at(2).model_path == "m/car.stl");
  CHECK_THROWS_AS(parse_catalog("{\"x\": {}}"), DispatchError);
  CHECK_THROWS_AS(parse_catalog("not json"), DispatchError);
}

TEST_CASE("session engine protocol") {
  const auto& model = testing::trained_synthetic().result.model;
  SessionEngine s(model, {});
  CHECK(s.window() == 16);
  CHECK(s.step() == 8);

  SessionEngine early(model, {});
  auto reply = early.handle(SampleFrame{std::vector<float>(14, 0.0f)});
  REQUIRE(reply.size() == 1);
  CHECK(std::get<ErrorFrame>(reply[0]).code == ErrorCode::unexpected_frame);
  CHECK(early.closed());
  CHECK(early.handle(HelloFrame{kWireVersion, 14, 128.0f}).empty());

  SessionEngine wrong(model, {});
  reply = wrong.handle(HelloFrame{2, 14, 128.0f});
  CHECK(std::get<ErrorFrame>(reply[0]).code == ErrorCode::version_mismatch);

  SessionEngine channels(model, {});
  reply = channels.handle(HelloFrame{kWireVersion, 13, 128.0f});
  CHECK(std::get<ErrorFrame>(reply[0]).code == ErrorCode::channel_mismatch);

  reply = s.handle(HelloFrame{kWireVersion, 14, 128.0f});
  REQUIRE(reply.size() == 1);
  CHECK(std::get<HelloFrame>(reply[0]).channels == 14);
  // Fewer than one window of samples: no prediction, no decision.
  for (int i = 0; i < 15; ++i) CHECK(s.handle(SampleFrame{std::vector<float>(14, 0.1f)}).empty());
  CHECK(s.stats().predictions == 0);

  CHECK_THROWS_AS(SessionEngine(model, {.window = 32}), net::NetError);
}

TEST_CASE("session decides the planted class within ten steps of a full window") {
  const auto& model = testing::trained_synthetic().result.model;
  for (int cls = 1; cls <= 4; ++cls) {
    const Recording rec = planted(cls, 400, 100 + static_cast<std::uint64_t>(cls));
    AuditLog audit;
    SessionEngine s(model, {}, 7, &audit);
    s.handle(HelloFrame{kWireVersion, 14, 128.0f});
    std::optional<DecisionFrame> first;
    for (Eigen::Index t = 0; t < rec.num_samples() && !first; ++t) {
      SampleFrame f;
      for (Eigen::Index c = 0; c < 14; ++c) f.values.push_back(static_cast<float>(rec.data(c, t)));
      for (const auto& out : s.handle(f)) {
        if (const auto* d = std::get_if<DecisionFrame>(&out)) first = *d;
      }
    }
    REQUIRE(first.has_value());
    CHECK(first->class_id == cls);
    CHECK(first->votes >= 7);
    REQUIRE(s.decisions().size() == 1);
    CHECK(s.decisions()[0].sample_index <= static_cast<std::uint64_t>(s.window() + 10 * s.step()));
    CHECK(audit.events().size() == 1);
    CHECK(s.acquisition_seconds() == doctest::Approx(0.125));
  }
}

TEST_CASE("loopback simulate and serve") {
  const auto& model = testing::trained_synthetic().result.model;
  const Catalog cat = default_catalog();
  DispatchLog dlog;
  AuditLog audit;
  ServerConfig cfg;
  cfg.max_sessions = 2;
  Server server(model, cfg, &audit, &cat, &dlog);
  server.bind();
  std::thread loop([&] { server.run(); });

  SimulateOptions opts;
  opts.port = server.port();
  const SimulateResult ok = simulate(planted(3, 600, 55), opts);
  CHECK_FALSE(ok.error.has_value());
  CHECK(ok.samples_sent == 600);
  REQUIRE_FALSE(ok.decisions.empty());
  int threes = 0;
  for (const auto& d : ok.decisions) threes += d.class_id == 3;
  CHECK(threes * 2 > static_cast<int>(ok.decisions.size()));
  CHECK(ok.decisions.front().class_id == 3);

  opts.protocol_version = 2;
  const SimulateResult rejected = simulate(planted(3, 50, 56), opts);
  REQUIRE(rejected.error.has_value());
  CHECK(rejected.error->code == ErrorCode::version_mismatch);
  CHECK(rejected.decisions.empty());

  loop.join();
  CHECK(server.sessions_finished() == 2);
  CHECK(dlog.records().size() == ok.decisions.size());
  CHECK(dlog.records().front().object == "boat");
}
