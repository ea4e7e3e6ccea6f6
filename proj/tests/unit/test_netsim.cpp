#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cmath>
#include <thread>

#include "chameleon/analysis.hpp"
#include "chameleon/error.hpp"
#include "chameleon/netsim/errors.hpp"
#include "chameleon/netsim/message.hpp"
#include "chameleon/netsim/session.hpp"
#include "chameleon/netsim/transcript.hpp"
#include "chameleon/netsim/transport.hpp"
#include "chameleon/protocols.hpp"
#include "chameleon/rng.hpp"

using namespace chameleon;
using namespace chameleon::netsim;

namespace {

ExperimentConfig cfg_with(double a, double b, std::uint64_t n_total, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.a = Angle(a);
  cfg.b = Angle(b);
  cfg.n_total = n_total;
  cfg.n_grid = std::min<std::uint64_t>(1000, n_total);
  cfg.seed = seed;
  return cfg;
}

SessionOptions over(TransportKind t) {
  SessionOptions o;
  o.transport = t;
  return o;
}

// A misbehaving station on a TCP port: answers Config silently, then runs `reply`
// for every Trial until the link closes.
template <typename F>
std::pair<Endpoint, std::jthread> rogue_station(F reply) {
  auto listener = std::make_shared<TcpListener>(Endpoint{"127.0.0.1", 0});
  const Endpoint where = listener->local();
  std::jthread t([listener, reply]() mutable {
    try {
      auto link = listener->accept();
      while (auto body = link->receive()) {
        const Message m = decode_body(*body);
        if (m.kind == MessageKind::Trial) reply(*link, m);
        if (m.kind == MessageKind::Done) {
          link->send(encode_body(Message::done()));
          break;
        }
      }
      link->close();
    } catch (const Error&) {
    }
  });
  return {where, std::move(t)};
}

// Raw socket listener that writes `bytes` to whoever connects, then closes.
std::pair<Endpoint, std::jthread> raw_station(std::string bytes) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  EXPECT_EQ(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
  EXPECT_EQ(::listen(fd, 1), 0);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  const Endpoint where{"127.0.0.1", ntohs(addr.sin_port)};
  std::jthread t([fd, bytes] {
    const int c = ::accept(fd, nullptr, nullptr);
    if (c >= 0) {
      char buf[4096];
      (void)::recv(c, buf, sizeof buf, 0);  // the Config frame
      (void)::send(c, bytes.data(), bytes.size(), MSG_NOSIGNAL);
      ::shutdown(c, SHUT_RDWR);
      ::close(c);
    }
    ::close(fd);
  });
  return {where, std::move(t)};
}

std::size_t count_replies(const Transcript& t, LinkId link) {
  std::size_t n = 0;
  for (const auto& c : t.entries()) {
    if (c.link == link && c.direction == Direction::ToCentral && decode_body(c.body).kind == MessageKind::Reply) ++n;
  }
  return n;
}

}  // namespace

// ---- wire format ----

TEST(WireFormat, ExactBodies) {
  EXPECT_EQ(encode_body(Message::trial(3, Angle(0.5))), R"({"kind":"trial","index":3,"sigma":0.5})");
  EXPECT_EQ(encode_body(Message::reply(7, Outcome::Empty)), R"({"kind":"reply","index":7,"outcome":"empty"})");
  EXPECT_EQ(encode_body(Message::reply(8, Outcome::Plus)), R"({"kind":"reply","index":8,"outcome":"+1"})");
  EXPECT_EQ(encode_body(Message::reply(9, Outcome::Minus)), R"({"kind":"reply","index":9,"outcome":"-1"})");
  EXPECT_EQ(encode_body(Message::done()), R"({"kind":"done"})");
  EXPECT_EQ(format_wire_angle(kPi / 3), "1.0471975511965976");
  EXPECT_EQ(format_wire_angle(0.0), "0");
}

TEST(WireFormat, FrameHeaderIsBigEndianLength) {
  const std::string body(300, 'x');
  const std::string frame = encode_frame(body);
  ASSERT_EQ(frame.size(), 304u);
  EXPECT_EQ(static_cast<unsigned char>(frame[0]), 0u);
  EXPECT_EQ(static_cast<unsigned char>(frame[1]), 0u);
  EXPECT_EQ(static_cast<unsigned char>(frame[2]), 1u);
  EXPECT_EQ(static_cast<unsigned char>(frame[3]), 44u);
  EXPECT_EQ(frame.substr(4), body);
}

TEST(WireFormat, RoundTripProperty) {
  const auto s = rng::CounterStream::derive(9, "test/wire");
  for (std::uint64_t i = 0; i < 5000; ++i) {
    const Angle sigma(kTwoPi * s.uniform(i));
    const std::uint64_t index = s.bits(i, 1) >> (s.bits(i, 2) % 64);
    const Message t = decode_body(encode_body(Message::trial(index, sigma)));
    ASSERT_EQ(t.kind, MessageKind::Trial);
    ASSERT_EQ(t.index, index);
    ASSERT_EQ(t.sigma, sigma);
    const Outcome o = static_cast<Outcome>(static_cast<int>(s.bits(i, 3) % 3) - 1);
    const Message r = decode_body(encode_body(Message::reply(index, o)));
    ASSERT_EQ(r.outcome, o);
    ASSERT_EQ(r.index, index);
    const Message c = decode_body(encode_body(Message::config(sigma, index)));
    ASSERT_EQ(c.kind, MessageKind::Config);
    ASSERT_EQ(c.setting, sigma);
    ASSERT_EQ(c.seed, index);
  }
}

TEST(WireFormat, NonCanonicalBodiesDecodeLikeCanonicalOnes) {
  const Message a = decode_body(R"({ "sigma" : 0.5, "index" : 3, "kind" : "trial" })");
  EXPECT_EQ(a.kind, MessageKind::Trial);
  EXPECT_EQ(a.index, 3u);
  EXPECT_EQ(a.sigma, Angle(0.5));
  const Message b = decode_body(R"({"outcome":"-1","kind":"reply","index":12})");
  EXPECT_EQ(b.outcome, Outcome::Minus);
  EXPECT_EQ(b.index, 12u);
}

TEST(WireFormat, StrictDecoding) {
  for (const char* bad : {
           R"({"kind":"trial","index":3})",
           R"({"kind":"trial","index":3,"sigma":0.5,"setting":1.0})",
           R"({"kind":"trial","index":-3,"sigma":0.5})",
           R"({"kind":"trial","index":3,"sigma":7.0})",
           R"({"kind":"trial","index":3,"sigma":"0.5"})",
           R"({"kind":"reply","index":1,"outcome":"+2"})",
           R"({"kind":"reply","index":1,"outcome":1})",
           R"({"kind":"teleport"})",
           R"({"kind":"done","extra":1})",
           R"([1,2,3])",
           R"(not json)",
           "",
       }) {
    EXPECT_THROW(decode_body(bad), ProtocolError) << bad;
  }
}

TEST(FrameDecoder, SplitsArbitraryChunks) {
  std::string stream;
  for (int i = 0; i < 50; ++i) stream += encode_frame(encode_body(Message::trial(i, Angle(0.01 * i))));
  for (std::size_t chunk : {1u, 3u, 7u, 64u, 100000u}) {
    FrameDecoder d;
    std::vector<std::string> bodies;
    for (std::size_t p = 0; p < stream.size(); p += chunk) {
      d.feed(std::string_view(stream).substr(p, chunk));
      while (auto b = d.next()) bodies.push_back(*b);
    }
    ASSERT_EQ(bodies.size(), 50u);
    EXPECT_EQ(d.pending(), 0u);
    EXPECT_EQ(decode_body(bodies[49]).index, 49u);
  }
}

TEST(FrameDecoder, RejectsOversizedFrames) {
  FrameDecoder d;
  EXPECT_THROW(d.feed(std::string("\xff\xff\xff\xff", 4)), TransportError);
  FrameDecoder partial;
  partial.feed(std::string("\x00\x00\x00\x05{\"k", 7));
  EXPECT_FALSE(partial.next());
  EXPECT_EQ(partial.pending(), 7u);
}

// ---- transports ----

TEST(InProcessLink, DeliversInOrderAndCloses) {
  auto [x, y] = make_in_process_link();
  x->send("one");
  x->send("two");
  EXPECT_EQ(*y->receive(), "one");
  EXPECT_EQ(*y->receive(), "two");
  y->close();
  EXPECT_FALSE(x->receive());
  EXPECT_THROW(x->send("three"), TransportError);
}

TEST(TcpLink, RoundTripAndEof) {
  TcpListener listener(Endpoint{"127.0.0.1", 0});
  std::jthread server([&] {
    auto link = listener.accept();
    while (auto b = link->receive()) link->send("echo:" + *b);
    link->close();
  });
  auto client = tcp_connect(listener.local());
  const std::string big(kMaxFrameBytes - 5, 'z');
  client->send("hello");
  client->send(big);
  EXPECT_EQ(*client->receive(), "echo:hello");
  const auto echoed = client->receive();
  ASSERT_TRUE(echoed);
  EXPECT_EQ(echoed->size(), big.size() + 5);
  client->close();
}

TEST(TcpLink, ConnectFailsWithTransportError) {
  Endpoint where;
  {
    TcpListener l(Endpoint{"127.0.0.1", 0});
    where = l.local();
  }
  EXPECT_THROW(tcp_connect(where, std::chrono::milliseconds(200)), TransportError);
}

TEST(Endpoint, Parse) {
  const auto e = Endpoint::parse("127.0.0.1:5000");
  EXPECT_EQ(e.host, "127.0.0.1");
  EXPECT_EQ(e.port, 5000);
  EXPECT_EQ(e.str(), "127.0.0.1:5000");
  EXPECT_THROW(Endpoint::parse("localhost"), ConfigError);
  EXPECT_THROW(Endpoint::parse("1.2.3.4:99999"), ConfigError);
  EXPECT_THROW(Endpoint::parse("1.2.3.4:x"), ConfigError);
}

// ---- sessions ----

TEST(RunSession, MatchesRunDirect) {
  const auto cfg = cfg_with(0, 0, 100'000, 3);
  const auto s = run_session(cfg, over(TransportKind::InProcess));
  const auto direct = run_direct(cfg);
  EXPECT_EQ(s.records, direct);
  EXPECT_EQ(s.report, analysis::estimate_correlation(direct));
  EXPECT_NEAR(s.report.correlation, -1.0, 0.02);
}

TEST(RunSession, TcpEqualsInProcess) {
  for (auto [a, b] : {std::pair{0.0, kPi / 3}, std::pair{1.0, 4.0}}) {
    const auto cfg = cfg_with(a, b, 50'000, 17);
    const auto local = run_session(cfg, over(TransportKind::InProcess));
    const auto tcp = run_session(cfg, over(TransportKind::Tcp));
    EXPECT_EQ(local.report, tcp.report);
    EXPECT_EQ(local.transcript, tcp.transcript);
  }
}

TEST(RunSession, TranscriptShape) {
  const auto cfg = cfg_with(0.5, 2.0, 3000, 1);
  const auto s = run_session(cfg);
  // 2 Config + 2*n Trial + 2*n Reply + 2 Done each way + 1 Result
  EXPECT_EQ(s.transcript.size(), 2 + 4 * 3000 + 4 + 1);
  const auto& last = s.transcript.entries().back();
  EXPECT_EQ(last.link, LinkId::Central);
  EXPECT_EQ(last.direction, Direction::Emit);
  const Message result = decode_body(last.body);
  EXPECT_EQ(result.kind, MessageKind::Result);
  EXPECT_EQ(result.payload.at("n_coincidences").get<std::uint64_t>(), s.report.n_coincidences);
  EXPECT_EQ(count_replies(s.transcript, LinkId::A), 3000u);

  std::uint64_t coincidences = 0;
  std::map<std::uint64_t, int> non_empty;
  for (const auto& c : s.transcript.entries()) {
    if (c.direction != Direction::ToCentral) continue;
    const Message m = decode_body(c.body);
    if (m.kind == MessageKind::Reply && m.outcome != Outcome::Empty && ++non_empty[m.index] == 2) ++coincidences;
  }
  EXPECT_EQ(coincidences, s.report.n_coincidences);
}

TEST(RunSession, WindowDoesNotChangeTheReport) {
  const auto cfg = cfg_with(0.2, 1.9, 5000, 8);
  const auto ref = run_session(cfg).report;
  for (std::size_t w : {1u, 7u, 5000u, 100000u}) {
    SessionOptions o;
    o.window = w;
    EXPECT_EQ(run_session(cfg, o).report, ref) << "window=" << w;
  }
  SessionOptions bad;
  bad.window = 0;
  EXPECT_THROW(run_session(cfg, bad), ConfigError);
}

TEST(RunSession, SlowStationDoesNotChangeTheReport) {
  const auto cfg = cfg_with(0.0, 1.0, 2000, 4);
  const auto ref = run_session(cfg).report;
  for (auto t : {TransportKind::InProcess, TransportKind::Tcp}) {
    SessionOptions o = over(t);
    o.window = 64;
    o.station_b_options.reply_delay = std::chrono::microseconds(200);
    EXPECT_EQ(run_session(cfg, o).report, ref);
  }
}

TEST(RunSession, RejectsOldProtocolAndBadConfig) {
  auto cfg = cfg_with(0, 0, 100, 1);
  cfg.protocol = ProtocolKind::Old;
  EXPECT_THROW(run_session(cfg), ConfigError);
  cfg.protocol = ProtocolKind::Direct;
  cfg.n_total = 0;
  EXPECT_THROW(run_session(cfg), ConfigError);
}

TEST(RunSession, StationFailureKeepsPartialTranscript) {
  for (auto t : {TransportKind::InProcess, TransportKind::Tcp}) {
    SessionOptions o = over(t);
    o.window = 100;
    o.station_a_options.fail_after_trials = 250;
    try {
      run_session(cfg_with(0, 1, 10'000, 2), o);
      FAIL() << "expected TransportError";
    } catch (const TransportError& e) {
      const Transcript& partial = e.partial_transcript();
      EXPECT_FALSE(partial.empty());
      EXPECT_EQ(count_replies(partial, LinkId::A), 250u);
      EXPECT_TRUE(verify_locality(partial));
    }
  }
}

TEST(RunSession, StationRejectsForeignSetting) {
  SessionOptions o;
  o.station_a_options.expected_setting = Angle(2.0);
  EXPECT_THROW(run_session(cfg_with(0, 1, 100, 2), o), TransportError);
}

TEST(RunSession, DuplicateReplyIsAProtocolError) {
  auto [where, thread] = rogue_station([](Link& link, const Message& m) {
    link.send(encode_body(Message::reply(m.index == 5 ? 4 : m.index, Outcome::Plus)));
  });
  SessionOptions o = over(TransportKind::Tcp);
  o.station_a = where;
  try {
    run_session(cfg_with(0, 0, 100, 1), o);
    FAIL() << "expected ProtocolError";
  } catch (const ProtocolError& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos);
    EXPECT_FALSE(e.partial_transcript().empty());
  }
}

TEST(RunSession, UnknownReplyIndexIsAProtocolError) {
  auto [where, thread] = rogue_station(
      [](Link& link, const Message& m) { link.send(encode_body(Message::reply(m.index + 1000, Outcome::Plus))); });
  SessionOptions o = over(TransportKind::Tcp);
  o.station_b = where;
  EXPECT_THROW(run_session(cfg_with(0, 0, 100, 1), o), ProtocolError);
}

TEST(RunSession, FramingViolationIsATransportError) {
  auto [where, thread] = raw_station(std::string("\x7f\xff\xff\xff", 4));
  SessionOptions o = over(TransportKind::Tcp);
  o.station_a = where;
  EXPECT_THROW(run_session(cfg_with(0, 0, 100, 1), o), TransportError);
}

TEST(RunSession, TruncatedFrameIsATransportError) {
  auto [where, thread] = raw_station(std::string("\x00\x00\x00\x40{\"kind\"", 11));
  SessionOptions o = over(TransportKind::Tcp);
  o.station_a = where;
  EXPECT_THROW(run_session(cfg_with(0, 0, 100, 1), o), TransportError);
}

TEST(RunSession, RemoteStationsOverTcp) {
  std::vector<std::jthread> servers;
  Endpoint ends[2];
  for (int i = 0; i < 2; ++i) {
    auto listener = std::make_shared<TcpListener>(Endpoint{"127.0.0.1", 0});
    ends[i] = listener->local();
    servers.emplace_back([listener, i] {
      auto link = listener->accept();
      serve_station(*link, i == 0 ? RoleKind::StationA : RoleKind::StationB);
    });
  }
  SessionOptions o = over(TransportKind::Tcp);
  o.station_a = ends[0];
  o.station_b = ends[1];
  const auto cfg = cfg_with(0.3, 1.2, 20'000, 12);
  EXPECT_EQ(run_session(cfg, o).report, run_session(cfg).report);
}

// ---- locality audit ----

TEST(VerifyLocality, SessionsPass) {
  EXPECT_TRUE(verify_locality(Transcript{}));
  const auto s = run_session(cfg_with(0.25, 1.75, 5000, 6));
  EXPECT_TRUE(verify_locality(s.transcript));
  EXPECT_TRUE(verify_locality(s.transcript, Angle(0.25), Angle(1.75)));
  EXPECT_FALSE(verify_locality(s.transcript, Angle(1.75), Angle(0.25)));
}

TEST(VerifyLocality, SessionsPassForRandomSettings) {
  const auto s = rng::CounterStream::derive(2, "test/sweep");
  for (std::uint64_t i = 0; i < 10; ++i) {
    const double a = kTwoPi * s.uniform(i, 0);
    const double b = kTwoPi * s.uniform(i, 1);
    const auto t = i % 2 ? TransportKind::Tcp : TransportKind::InProcess;
    const auto res = run_session(cfg_with(a, b, 2000, i), over(t));
    EXPECT_TRUE(verify_locality(res.transcript));
    EXPECT_TRUE(verify_locality(res.transcript, Angle(a), Angle(b)));
  }
}

TEST(VerifyLocality, DeterministicGridSigmaEqualToSettingIsNotALeak) {
  // a = 2pi/1000 * 7 is one of the grid phases, so some Trial frames to B carry
  // exactly a's token in their sigma field.
  const double a = kTwoPi / 1000 * 7;
  const auto res = run_session(cfg_with(a, 1.0, 2000, 1));
  EXPECT_TRUE(verify_locality(res.transcript));
}

TEST(VerifyLocality, ForgedFramesFail) {
  const double a = 0.25;
  const double b = 1.75;
  const auto live = run_session(cfg_with(a, b, 200, 6)).transcript;
  const std::string token = format_wire_angle(b);

  auto forge = [&](auto mutate) {
    Transcript t = live;
    mutate(t.mutable_entries());
    return t;
  };
  auto first = [](std::vector<Capture>& e, LinkId link, MessageKind kind) -> Capture& {
    for (auto& c : e)
      if (c.link == link && c.body.find(kind == MessageKind::Trial ? "\"trial\"" : "\"reply\"") != std::string::npos)
        return c;
    throw std::logic_error("no such frame");
  };

  // b injected into a C->A Trial frame.
  const auto injected = forge([&](auto& e) {
    Capture& c = first(e, LinkId::A, MessageKind::Trial);
    c.body.insert(c.body.size() - 1, ",\"b\":" + token);
  });
  EXPECT_FALSE(verify_locality(injected));
  EXPECT_FALSE(verify_locality(injected, Angle(a), Angle(b)));

  // A Trial to A with the schema intact but an extra setting field.
  const auto extra = forge([&](auto& e) {
    first(e, LinkId::A, MessageKind::Trial).body = R"({"kind":"trial","index":0,"setting":)" + token + "}";
  });
  EXPECT_FALSE(verify_locality(extra));

  // Config to A announcing b.
  const auto config = forge([&](auto& e) { e[0].body = encode_body(Message::config(Angle(b), 1)); });
  EXPECT_FALSE(verify_locality(config, Angle(a), Angle(b)));

  // A Reply travelling the wrong way.
  const auto direction = forge([&](auto& e) { first(e, LinkId::B, MessageKind::Reply).direction = Direction::ToStation; });
  EXPECT_FALSE(verify_locality(direction));

  // Garbage frame.
  const auto garbage = forge([&](auto& e) { e[3].body = "{\"kind\":"; });
  EXPECT_FALSE(verify_locality(garbage));
}

// ---- replay ----

TEST(Replay, ReproducesTheLiveReport) {
  for (auto t : {TransportKind::InProcess, TransportKind::Tcp}) {
    const auto s = run_session(cfg_with(0.0, 2.0, 20'000, 14), over(t));
    EXPECT_EQ(replay(s.transcript), s.report);
  }
}

TEST(Replay, SurvivesNdjsonRoundTrip) {
  const auto s = run_session(cfg_with(1.0, 1.5, 3000, 2));
  const std::string text = s.transcript.to_ndjson();
  const Transcript back = Transcript::from_ndjson(text);
  EXPECT_EQ(back, s.transcript);
  EXPECT_EQ(back.to_ndjson(), text);
  EXPECT_EQ(replay(back), s.report);
  const auto first_line = text.substr(0, text.find('\n'));
  EXPECT_EQ(first_line.rfind(R"({"link":"A","direction":"to_station","frame":")", 0), 0u);
  EXPECT_THROW(Transcript::from_ndjson("{\"link\":\"Z\",\"direction\":\"emit\",\"frame\":\"\"}\n"), ProtocolError);
  EXPECT_THROW(Transcript::from_ndjson("nope\n"), ProtocolError);
}

TEST(Replay, IsOrderFree) {
  const auto s = run_session(cfg_with(0.4, 0.9, 2000, 5));
  Transcript t = s.transcript;
  auto& e = t.mutable_entries();
  // Move all B replies ahead of all A replies, and reverse them.
  std::stable_partition(e.begin(), e.end(), [](const Capture& c) { return c.link == LinkId::B; });
  std::reverse(e.begin(), e.end());
  EXPECT_EQ(replay(t), s.report);
}

TEST(Replay, DetectsMissingAndDuplicatedReplies) {
  const auto s = run_session(cfg_with(0.4, 0.9, 2000, 5));
  auto is_reply = [](const Capture& c) { return c.body.find("\"reply\"") != std::string::npos; };

  Transcript missing = s.transcript;
  auto& m = missing.mutable_entries();
  m.erase(std::find_if(m.begin(), m.end(), is_reply));
  EXPECT_THROW(replay(missing), ProtocolError);

  Transcript dup = s.transcript;
  auto& d = dup.mutable_entries();
  d.push_back(*std::find_if(d.begin(), d.end(), is_reply));
  EXPECT_THROW(replay(dup), ProtocolError);

  Transcript malformed = s.transcript;
  std::find_if(malformed.mutable_entries().begin(), malformed.mutable_entries().end(), is_reply)->body = "{";
  EXPECT_THROW(replay(malformed), ProtocolError);
}
