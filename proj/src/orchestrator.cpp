#include "secdot/orchestrator.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "secdot/escaped.hpp"
#include "secdot/protocol.hpp"

namespace secdot {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void require_config(bool ok, const std::string& msg) {
  if (!ok) fail(ErrorKind::kConfig, msg);
}

template <class T>
struct Executed {
  GramAssembly<T> assembly;
  Transcript transcript;
  double protocol_ms = 0.0;
  double assembly_ms = 0.0;
};

// Prefers the root cause: a failing party's own error over the transport
// errors it triggers in everyone else.
[[noreturn]] void rethrow_first(const std::vector<std::exception_ptr>& errors) {
  std::exception_ptr fallback;
  for (const auto& e : errors) {
    if (!e) continue;
    if (!fallback) fallback = e;
    try {
      std::rethrow_exception(e);
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::kTransport) throw;
    } catch (...) {
      throw;
    }
  }
  std::rethrow_exception(fallback);
}

bool any_error(const std::vector<std::exception_ptr>& errors) {
  return std::any_of(errors.begin(), errors.end(), [](const auto& e) { return bool(e); });
}

template <class T>
Executed<T> finish(const RunConfig& c, std::vector<FpInbox> boxes, Transcript transcript,
                   double protocol_ms) {
  Executed<T> out;
  out.protocol_ms = protocol_ms;
  auto t0 = Clock::now();
  out.assembly = fp_assemble<T>(c.protocol, boxes, c.features);
  out.assembly_ms = ms_since(t0);
  out.transcript = std::move(transcript);
  return out;
}

template <class T>
Executed<T> execute_loopback(const RunConfig& c, const std::vector<PartyState<T>>& states) {
  const int m = c.parties;
  const auto t0 = Clock::now();
  Transcript transcript;
  std::vector<std::unique_ptr<Endpoint>> fp_side(m), party_side(m);
  for (int i = 0; i < m; ++i) {
    std::tie(fp_side[i], party_side[i]) = channel_pair(TransportKind::kLoopback);
  }
  std::map<PartyPair, std::pair<std::unique_ptr<Endpoint>, std::unique_ptr<Endpoint>>> pairs;
  for (const auto& p : pair_schedule(m)) pairs[p] = channel_pair(TransportKind::kLoopback);

  std::vector<std::exception_ptr> errors(m + 1);
  std::vector<std::thread> threads;
  for (int i = 0; i < m; ++i) {
    const auto id = static_cast<std::uint16_t>(i + 1);
    std::map<std::uint16_t, std::unique_ptr<Endpoint>> peer_ends;
    for (auto& [key, ends] : pairs) {
      if (key.first == id) peer_ends[key.second] = std::move(ends.first);
      if (key.second == id) peer_ends[key.first] = std::move(ends.second);
    }
    threads.emplace_back([&, i, fp_end = std::move(party_side[i]),
                          peer_ends = std::move(peer_ends)]() mutable {
      try {
        PartyLink fp(std::move(fp_end), &transcript);
        std::map<std::uint16_t, PartyLink> peers;
        for (auto& [peer, end] : peer_ends) peers.emplace(peer, PartyLink(std::move(end), &transcript));
        run_party(c.protocol, states[i], m, c.seed, fp, peers);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }

  std::vector<FpInbox> boxes;
  {
    std::vector<PartyLink> links;
    links.reserve(m);
    for (int i = 0; i < m; ++i) links.emplace_back(std::move(fp_side[i]), &transcript);
    std::vector<PartyLink*> ptrs;
    for (auto& l : links) ptrs.push_back(&l);
    try {
      boxes = run_function_party(ptrs);
    } catch (...) {
      errors[m] = std::current_exception();
    }
  }
  for (auto& t : threads) t.join();
  if (any_error(errors)) rethrow_first(errors);
  return finish<T>(c, std::move(boxes), std::move(transcript), ms_since(t0));
}

// --- multi-process tcp ------------------------------------------------------

void write_all(int fd, const std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    ssize_t put = ::write(fd, p, n);
    if (put < 0) {
      if (errno == EINTR) continue;
      return;
    }
    p += put;
    n -= static_cast<std::size_t>(put);
  }
}

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot read " + path);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Child result file: one status byte (0 or an ErrorKind), then either the
// serialized transcript or the error message.
template <class T>
[[noreturn]] void party_process(const RunConfig& c, const PartyState<T>& state,
                                std::vector<std::unique_ptr<TcpListener>>& fp_listen,
                                std::map<PartyPair, std::unique_ptr<TcpListener>>& pair_listen,
                                int out_fd) {
  const std::uint16_t id = state.party_id;
  for (auto& l : fp_listen) l->close();
  for (auto& [key, l] : pair_listen)
    if (key.first != id) l->close();

  std::uint8_t status = 0;
  Bytes body;
  try {
    Transcript transcript;
    {
      TcpConfig fp_cfg;
      fp_cfg.port = fp_listen[id - 1]->port();
      PartyLink fp(tcp_connect(fp_cfg), &transcript);
      std::map<std::uint16_t, PartyLink> peers;
      for (auto& [key, l] : pair_listen) {
        if (key.second != id) continue;
        TcpConfig cfg;
        cfg.port = l->port();
        peers.emplace(key.first, PartyLink(tcp_connect(cfg), &transcript));
      }
      for (auto& [key, l] : pair_listen) {
        if (key.first != id) continue;
        peers.emplace(key.second, PartyLink(l->accept(), &transcript));
        l->close();
      }
      run_party(c.protocol, state, c.parties, c.seed, fp, peers);
    }
    body = transcript.serialize();
  } catch (const Error& e) {
    status = static_cast<std::uint8_t>(e.kind());
    std::string msg = e.what();
    body.assign(msg.begin(), msg.end());
  } catch (const std::exception& e) {
    status = static_cast<std::uint8_t>(ErrorKind::kProtocol);
    std::string msg = e.what();
    body.assign(msg.begin(), msg.end());
  }
  write_all(out_fd, &status, 1);
  write_all(out_fd, body.data(), body.size());
  ::close(out_fd);
  ::_exit(status);
}

template <class T>
Executed<T> execute_tcp(const RunConfig& c, const std::vector<PartyState<T>>& states) {
  const int m = c.parties;
  const auto t0 = Clock::now();
  std::uint16_t next_port = c.base_port;
  auto listen_cfg = [&] {
    TcpConfig cfg;
    if (c.base_port != 0) cfg.port = next_port++;
    return cfg;
  };
  std::vector<std::unique_ptr<TcpListener>> fp_listen;
  for (int i = 0; i < m; ++i) fp_listen.push_back(std::make_unique<TcpListener>(listen_cfg()));
  std::map<PartyPair, std::unique_ptr<TcpListener>> pair_listen;
  for (const auto& p : pair_schedule(m)) pair_listen[p] = std::make_unique<TcpListener>(listen_cfg());

  std::vector<std::string> paths;
  std::vector<pid_t> pids;
  auto cleanup = [&] {
    for (const auto& p : paths) std::remove(p.c_str());
  };
  for (int i = 0; i < m; ++i) {
    std::string tmpl = (std::filesystem::temp_directory_path() / "secdot-party-XXXXXX").string();
    int fd = ::mkstemp(tmpl.data());
    if (fd < 0) {
      cleanup();
      fail(ErrorKind::kIo, "cannot create temporary file for party " + std::to_string(i + 1));
    }
    paths.push_back(tmpl);
    std::fflush(nullptr);
    pid_t pid = ::fork();
    if (pid < 0) {
      ::close(fd);
      cleanup();
      fail(ErrorKind::kTransport, "fork failed for party " + std::to_string(i + 1));
    }
    if (pid == 0) party_process(c, states[i], fp_listen, pair_listen, fd);
    ::close(fd);
    pids.push_back(pid);
  }
  for (auto& [key, l] : pair_listen) l->close();

  Transcript transcript;
  std::vector<FpInbox> boxes;
  std::vector<std::exception_ptr> errors(m + 1);
  {
    std::vector<PartyLink> links;
    try {
      for (int i = 0; i < m; ++i) links.emplace_back(fp_listen[i]->accept(), &transcript);
      std::vector<PartyLink*> ptrs;
      for (auto& l : links) ptrs.push_back(&l);
      boxes = run_function_party(ptrs);
    } catch (...) {
      errors[m] = std::current_exception();
    }
  }
  for (auto& l : fp_listen) l->close();

  std::vector<Transcript> parts(m);
  for (int i = 0; i < m; ++i) {
    int wstatus = 0;
    while (::waitpid(pids[i], &wstatus, 0) < 0 && errno == EINTR) {
    }
    const std::string who = "party " + std::to_string(i + 1);
    try {
      if (!WIFEXITED(wstatus)) fail(ErrorKind::kTransport, who + " process terminated abnormally");
      Bytes data = read_file(paths[i]);
      if (data.empty()) fail(ErrorKind::kTransport, who + " process produced no result");
      if (data[0] != 0) {
        fail(static_cast<ErrorKind>(data[0]), std::string(data.begin() + 1, data.end()));
      }
      parts[i] = Transcript::deserialize(std::span(data).subspan(1));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  cleanup();
  if (any_error(errors)) rethrow_first(errors);
  for (const auto& p : parts) transcript.merge(p);
  return finish<T>(c, std::move(boxes), std::move(transcript), ms_since(t0));
}

template <class T>
Executed<T> execute(const RunConfig& c, const std::vector<PartyState<T>>& states) {
  return c.transport == TransportKind::kTcp ? execute_tcp(c, states)
                                            : execute_loopback(c, states);
}

template <class T>
std::string checksum_of(const Matrix<T>& m) {
  Bytes bytes;
  bytes.reserve(8 * m.size());
  for (const T& v : m.data()) {
    std::uint64_t w = ScalarTraits<T>::to_wire(v);
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(w >> (8 * i)));
  }
  return sha256_hex(bytes);
}

double max_abs_diff(const Matrix<double>& a, const Matrix<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a.data()[i] - b.data()[i]));
  return d;
}

double max_abs(const Matrix<double>& a) {
  double d = 0.0;
  for (double v : a.data()) d = std::max(d, std::fabs(v));
  return d;
}

template <class T>
void run_typed(RunReport& report, const std::vector<Matrix<double>>& real) {
  const RunConfig& c = report.config;
  const auto t0 = Clock::now();
  std::vector<PartyState<T>> states;
  for (int i = 0; i < c.parties; ++i) {
    const auto id = static_cast<std::uint16_t>(i + 1);
    if constexpr (is_mod_int_v<T>) {
      states.push_back(PartyState<T>::create(id, encode_matrix(real[i], c.domain.codec()), c.seed));
    } else {
      states.push_back(PartyState<T>::create(id, real[i], c.seed));
    }
  }

  Executed<T> ex = execute(c, states);
  report.timing.protocol_ms = ex.protocol_ms;
  report.timing.assembly_ms = ex.assembly_ms;
  const Matrix<T>& gram = ex.assembly.full;
  report.gram_checksum = checksum_of(gram);
  if constexpr (is_mod_int_v<T>) {
    report.gram = decode_dot_matrix(gram, c.domain.codec());
  } else {
    report.gram = gram;
  }
  report.transcript = std::move(ex.transcript);
  report.totals = report.transcript.totals();
  report.audit = transcript_audit(report.totals, report.prediction);

  if (c.verify) {
    // Test-only oracle: it sees every party's plaintext.
    const auto tv = Clock::now();
    std::vector<Matrix<T>> data;
    for (const auto& s : states) data.push_back(s.data);
    Matrix<T> all = hconcat<T>(data);
    Matrix<T> oracle = gram_t(all, all);
    Verification v;
    if constexpr (is_mod_int_v<T>) {
      v.passed = oracle == gram;
      v.max_deviation = max_abs_diff(decode_dot_matrix(oracle, c.domain.codec()), report.gram);
      v.bound = 0.0;
    } else {
      v.max_deviation = max_abs_diff(oracle, gram);
      v.bound = 1e-9 * std::max(1.0, max_abs(oracle));
      v.passed = v.max_deviation <= v.bound;
    }
    report.verification = v;
    report.timing.verify_ms = ms_since(tv);
  }

  if (c.sigma) {
    const auto tk = Clock::now();
    report.kernel = rbf_from_gram(report.gram, *c.sigma);
    report.timing.kernel_ms = ms_since(tk);
    if (c.verify) {
      Matrix<double> all = hconcat<double>(real);
      report.kernel_deviation = max_abs_diff(rbf_direct(all, *c.sigma).entries,
                                             report.kernel->entries);
    }
  }
  report.timing.total_ms = ms_since(t0);
}

nlohmann::json counts_json(const ElementCounts& e) {
  return {{"among_ips", e.among_ips}, {"ip_fp", e.ip_fp}, {"total", e.total()}};
}

nlohmann::json report_json(const RunReport& r, bool include_timing) {
  using nlohmann::json;
  const RunConfig& c = r.config;
  json config = {
      {"protocol", to_string(c.protocol)},
      {"parties", c.parties},
      {"features", c.features},
      {"samples", c.samples},
      {"domain", c.domain.name()},
      {"scale_bits", c.domain.is_field() ? json(c.domain.scale_bits) : json(nullptr)},
      {"transport", c.transport == TransportKind::kTcp ? "tcp" : "loopback"},
      {"seed", c.seed},
      {"sigma", c.sigma ? json(*c.sigma) : json(nullptr)},
      {"verify", c.verify},
      {"data_source", c.csv_paths.empty() ? json("synthetic") : json(c.csv_paths)},
  };
  json by_kind = json::object();
  for (const auto& [kind, frames] : r.totals.kind_frames) {
    by_kind[to_string(kind)] = {{"frames", frames},
                                {"elements", r.totals.kind_elements.count(kind)
                                                 ? r.totals.kind_elements.at(kind)
                                                 : 0}};
  }
  json channels = json::array();
  for (const auto& [key, bytes] : r.totals.channel_bytes) {
    channels.push_back({{"sender", key.first}, {"receiver", key.second}, {"bytes", bytes}});
  }
  json transcript = {
      {"checksum", r.transcript.checksum()},
      {"frames", r.totals.frames},
      {"bytes",
       {{"ip_ip", r.totals.phase_bytes[0]},
        {"ip_fp", r.totals.phase_bytes[1]},
        {"total", r.totals.total_bytes()}}},
      {"elements",
       {{"ip_ip", r.totals.phase_elements[0]},
        {"ip_fp", r.totals.phase_elements[1]},
        {"total", r.totals.total_elements()}}},
      {"self_gram_elements", r.totals.self_gram_elements},
      {"by_kind", by_kind},
      {"channels", channels},
  };
  json model = {
      {"artifact", counts_json(r.prediction.artifact)},
      {"published", r.prediction.published ? counts_json(*r.prediction.published) : json("n/a")},
  };
  json audit = {
      {"match", r.audit.match},
      {"measured", counts_json(r.audit.measured)},
      {"predicted", counts_json(r.audit.predicted)},
      {"offending_kinds", r.audit.offending_kinds},
      {"published_form_match",
       r.audit.published_form_match ? json(*r.audit.published_form_match) : json("n/a")},
      {"published_ratio_re_over_escaped",
       r.audit.published_ratio_re_over_escaped ? json(*r.audit.published_ratio_re_over_escaped)
                                           : json("n/a")},
  };
  json verification = {{"status", "skipped"}};
  if (r.verification) {
    verification = {{"status", r.verification->passed ? "pass" : "fail"},
                    {"max_deviation", r.verification->max_deviation},
                    {"bound", r.verification->bound}};
  }
  json doc = {
      {"schema", "secdot.run-report/1"},
      {"config", config},
      {"seeds", {{"run", r.config.seed}, {"data", r.data_seeds}}},
      {"gram", {{"n", r.gram.rows()}, {"checksum", r.gram_checksum}}},
      {"verification", verification},
      {"transcript", transcript},
      {"cost_model", model},
      {"audit", audit},
      {"passed", r.passed()},
  };
  if (r.kernel) {
    json k = {{"sigma", r.kernel->sigma}, {"checksum", checksum_of(r.kernel->entries)}};
    if (r.kernel_deviation) k["max_deviation_vs_direct"] = *r.kernel_deviation;
    doc["kernel"] = k;
  }
  if (include_timing) {
    doc["timing_ms"] = {{"protocol", r.timing.protocol_ms},
                        {"assembly", r.timing.assembly_ms},
                        {"kernel", r.timing.kernel_ms},
                        {"verify", r.timing.verify_ms},
                        {"total", r.timing.total_ms}};
  }
  return doc;
}

}  // namespace

void validate(const RunConfig& c) {
  if (!c.csv_paths.empty()) {
    require_config(c.csv_paths.size() >= 2,
                   "need at least 2 parties, got " + std::to_string(c.csv_paths.size()) +
                       " data files");
    return;
  }
  require_config(c.parties >= 2, "need at least 2 parties, got " + std::to_string(c.parties));
  require_config(c.parties < kFunctionPartyId + 65535, "too many parties");
  require_config(c.features >= 1, "features must be at least 1");
  require_config(c.samples.size() == static_cast<std::size_t>(c.parties),
                 "got " + std::to_string(c.samples.size()) + " sample counts for " +
                     std::to_string(c.parties) + " parties");
  for (std::size_t i = 0; i < c.samples.size(); ++i) {
    require_config(c.samples[i] >= 1,
                   "party " + std::to_string(i + 1) + " must have at least 1 sample");
  }
  if (c.sigma) require_config(*c.sigma > 0.0, "sigma must be positive");
  if (c.domain.is_field()) require_config(c.domain.scale_bits <= 29, "scale bits must be <= 29");
}

std::vector<Matrix<double>> synthetic_data(std::size_t features,
                                           const std::vector<std::size_t>& samples,
                                           std::uint64_t seed) {
  std::vector<Matrix<double>> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    Rng rng(derive_seed(seed, SeedTag::kData, i + 1));
    Matrix<double> m(features, samples[i]);
    for (double& v : m.data()) v = static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
    out.push_back(std::move(m));
  }
  return out;
}

std::string RunReport::to_json(bool include_timing) const {
  return report_json(*this, include_timing).dump(2);
}

RunReport run(const RunConfig& config) {
  validate(config);
  RunReport report;
  report.config = config;
  RunConfig& c = report.config;

  std::vector<Matrix<double>> real;
  if (c.csv_paths.empty()) {
    real = synthetic_data(c.features, c.samples, c.seed);
    for (int i = 0; i < c.parties; ++i) {
      report.data_seeds.push_back(derive_seed(c.seed, SeedTag::kData, std::size_t(i + 1)));
    }
  } else {
    for (const auto& p : c.csv_paths) real.push_back(load_csv_real(p, c.csv_transpose));
    c.parties = static_cast<int>(real.size());
    c.features = real.front().rows();
    c.samples.clear();
    for (std::size_t i = 0; i < real.size(); ++i) {
      if (real[i].rows() != c.features) {
        fail(ErrorKind::kConfig, c.csv_paths[i] + " has " + std::to_string(real[i].rows()) +
                                     " features, expected " + std::to_string(c.features));
      }
      c.samples.push_back(real[i].cols());
    }
    validate(RunConfig{c.protocol, c.parties, c.features, c.samples, c.domain,
                       c.transport, c.base_port, c.seed, c.sigma, c.verify, {}, false});
  }

  report.prediction = cost_model(c.protocol, c.features, c.samples);
  if (c.domain.is_field()) {
    run_typed<Fp>(report, real);
  } else {
    run_typed<double>(report, real);
  }
  return report;
}

std::vector<std::string> gen_data(std::size_t features, const std::vector<std::size_t>& samples,
                                  std::uint64_t seed, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create " + out_dir + ": " + ec.message());
  std::vector<std::string> paths;
  auto data = synthetic_data(features, samples, seed);
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::string path =
        (std::filesystem::path(out_dir) / ("party_" + std::to_string(i + 1) + ".csv")).string();
    store_csv(data[i], path);
    paths.push_back(path);
  }
  return paths;
}

CompareResult compare(const RunConfig& config) {
  CompareResult out;
  for (Protocol p : {Protocol::kEscaped, Protocol::kRe}) {
    RunConfig c = config;
    c.protocol = p;
    out.reports.push_back(run(c));
  }
  const RunReport& e = out.reports[0];
  const RunReport& r = out.reports[1];
  out.grams_identical = e.gram_checksum == r.gram_checksum;
  out.max_gram_difference = max_abs_diff(e.gram, r.gram);
  if (e.config.domain.is_field()) {
    if (!out.grams_identical) {
      fail(ErrorKind::kVerification, "escaped and re produced different gram matrices (max |diff| " +
                                         std::to_string(out.max_gram_difference) + ")");
    }
  } else if (out.max_gram_difference > 1e-9 * std::max(1.0, max_abs(e.gram))) {
    fail(ErrorKind::kVerification, "escaped and re gram matrices differ by " +
                                       std::to_string(out.max_gram_difference));
  }
  return out;
}

std::string CompareResult::table() const {
  std::ostringstream os;
  os << std::left << std::setw(10) << "protocol" << std::right << std::setw(12) << "wall_ms"
     << std::setw(14) << "bytes" << std::setw(14) << "elements" << std::setw(20)
     << "published_elements" << "  verification\n";
  for (const auto& r : reports) {
    std::string status = r.verification ? (r.verification->passed ? "pass" : "fail") : "skipped";
    os << std::left << std::setw(10) << to_string(r.config.protocol) << std::right
       << std::setw(12) << std::fixed << std::setprecision(2) << r.timing.total_ms
       << std::setw(14) << r.totals.total_bytes() << std::setw(14)
       << r.totals.total_elements() << std::setw(20)
       << (r.prediction.published ? std::to_string(r.prediction.published->total()) : "n/a")
       << "  "
       << status << '\n';
  }
  os << "grams identical: " << (grams_identical ? "yes" : "no") << '\n';
  return os.str();
}

std::string CompareResult::to_json(bool include_timing) const {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : reports) runs.push_back(report_json(r, include_timing));
  nlohmann::json doc = {{"schema", "secdot.compare-report/1"},
                        {"runs", runs},
                        {"grams_identical", grams_identical},
                        {"max_gram_difference", max_gram_difference}};
  if (reports.size() == 2 && reports[0].totals.total_bytes() > 0) {
    doc["byte_ratio_re_over_escaped"] =
        double(reports[1].totals.total_bytes()) / double(reports[0].totals.total_bytes());
  }
  return doc.dump(2);
}

}  // namespace secdot
