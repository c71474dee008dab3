// secdot command line: run, gen-data, compare, dump-scheme, cost.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "secdot/cost.hpp"
#include "secdot/orchestrator.hpp"
#include "secdot/regen.hpp"

using namespace secdot;

namespace {

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      long long v = std::stoll(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      fail(ErrorKind::kConfig, "bad sample count '" + item + "' in --samples");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

struct RunFlags {
  std::string protocol = "escaped";
  int parties = 2;
  std::size_t features = 4;
  std::string samples = "2";
  std::string domain = "field";
  unsigned scale_bits = 16;
  std::string transport = "loopback";
  std::uint16_t base_port = 0;
  std::uint64_t seed = 1;
  double sigma = 0.0;
  bool verify = false;
  std::string report;
  std::vector<std::string> data;
  bool transpose = false;
  std::string kernel_out;

  void add(CLI::App* app, bool with_protocol) {
    if (with_protocol) {
      app->add_option("--protocol", protocol, "escaped or re")
          ->check(CLI::IsMember({"escaped", "re"}));
    }
    app->add_option("--parties,-M", parties, "number of input-parties");
    app->add_option("--features,-f", features, "features per sample");
    app->add_option("--samples,-n", samples,
                    "samples per party: one value for all, or n1,n2,...");
    app->add_option("--domain", domain, "field or float")->check(CLI::IsMember({"field", "float"}));
    app->add_option("--scale-bits", scale_bits, "fixed-point fraction bits (field)");
    app->add_option("--transport", transport, "loopback or tcp")
        ->check(CLI::IsMember({"loopback", "tcp"}));
    app->add_option("--base-port", base_port, "first tcp port (0: ephemeral)");
    app->add_option("--seed", seed, "run seed");
    app->add_option("--sigma", sigma, "RBF width; enables the kernel step");
    app->add_flag("--verify", verify, "check against the plaintext gram (test only)");
    app->add_option("--report", report, "write the JSON report here");
    app->add_option("--data", data, "per-party CSV files instead of synthetic data");
    app->add_flag("--transpose", transpose, "CSV lines are samples");
    app->add_option("--kernel-out", kernel_out, "export the kernel (.csv or .json)");
  }

  RunConfig config(CLI::App* app) const {
    RunConfig c;
    c.protocol = parse_protocol(protocol);
    c.parties = parties;
    c.features = features;
    c.samples = parse_sizes(samples);
    if (c.samples.size() == 1 && parties > 1) c.samples.assign(parties, c.samples[0]);
    c.domain = domain == "field" ? ScalarDomain::field(scale_bits) : ScalarDomain::float64();
    c.transport = transport == "tcp" ? TransportKind::kTcp : TransportKind::kLoopback;
    c.base_port = base_port;
    c.seed = seed;
    if (app->count("--sigma") > 0) c.sigma = sigma;
    c.verify = verify;
    c.csv_paths = data;
    c.csv_transpose = transpose;
    return c;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path);
  out << text << '\n';
}

int exit_status(const RunReport& r) {
  if (r.verification && !r.verification->passed) return static_cast<int>(ErrorKind::kVerification);
  if (!r.audit.match) return static_cast<int>(ErrorKind::kAudit);
  return 0;
}

void print_summary(const RunReport& r) {
  std::printf("protocol %s  M=%d f=%zu  domain %s  transport %s\n",
              to_string(r.config.protocol).c_str(), r.config.parties, r.config.features,
              r.config.domain.name().c_str(),
              r.config.transport == TransportKind::kTcp ? "tcp" : "loopback");
  std::printf("gram %zux%zu  sha256 %s\n", r.gram.rows(), r.gram.cols(), r.gram_checksum.c_str());
  std::printf("bytes ip_ip %llu  ip_fp %llu  elements ip_ip %llu  ip_fp %llu\n",
              (unsigned long long)r.totals.phase_bytes[0],
              (unsigned long long)r.totals.phase_bytes[1],
              (unsigned long long)r.totals.phase_elements[0],
              (unsigned long long)r.totals.phase_elements[1]);
  std::printf("audit %s", r.audit.match ? "match" : "MISMATCH");
  for (const auto& k : r.audit.offending_kinds) std::printf(" %s", k.c_str());
  std::printf("\n");
  if (r.verification) {
    std::printf("verification %s  max deviation %.3g (bound %.3g)\n",
                r.verification->passed ? "pass" : "FAIL", r.verification->max_deviation,
                r.verification->bound);
  }
  std::printf("wall %.2f ms\n", r.timing.total_ms);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"secure multi-party gram matrix toolkit"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "run one protocol end to end");
  run_flags.add(run_cmd, true);

  RunFlags cmp_flags;
  auto* cmp_cmd = app.add_subcommand("compare", "run both protocols on the same data");
  cmp_flags.add(cmp_cmd, false);

  std::size_t gen_features = 4;
  int gen_parties = 2;
  std::string gen_samples = "2";
  std::uint64_t gen_seed = 1;
  std::string gen_out = ".";
  auto* gen_cmd = app.add_subcommand("gen-data", "write synthetic per-party CSV data");
  gen_cmd->add_option("--parties,-M", gen_parties);
  gen_cmd->add_option("--features,-f", gen_features);
  gen_cmd->add_option("--samples,-n", gen_samples);
  gen_cmd->add_option("--seed", gen_seed);
  gen_cmd->add_option("--out", gen_out, "output directory");

  std::size_t dump_d = 0;
  auto* dump_cmd = app.add_subcommand("dump-scheme", "print the encoding scheme for length d");
  dump_cmd->add_option("--d", dump_d, "dot product length")->required();

  std::string cost_protocol = "escaped";
  int cost_m = 2;
  std::size_t cost_f = 1;
  std::size_t cost_n = 1;
  auto* cost_cmd = app.add_subcommand("cost", "closed-form element counts");
  cost_cmd->add_option("--protocol", cost_protocol)->check(CLI::IsMember({"escaped", "re"}));
  cost_cmd->add_option("--M", cost_m)->required();
  cost_cmd->add_option("--f", cost_f)->required();
  cost_cmd->add_option("--n", cost_n)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorKind::kConfig);
  }

  try {
    if (*run_cmd) {
      RunReport r = run(run_flags.config(run_cmd));
      print_summary(r);
      if (!run_flags.report.empty()) write_text(run_flags.report, r.to_json());
      if (!run_flags.kernel_out.empty() && r.kernel) {
        const bool json = run_flags.kernel_out.ends_with(".json");
        export_matrix(*r.kernel, run_flags.kernel_out,
                      json ? ExportFormat::kJson : ExportFormat::kCsv);
      }
      return exit_status(r);
    }
    if (*cmp_cmd) {
      CompareResult res = compare(cmp_flags.config(cmp_cmd));
      std::fputs(res.table().c_str(), stdout);
      if (!cmp_flags.report.empty()) write_text(cmp_flags.report, res.to_json());
      for (const auto& r : res.reports)
        if (int rc = exit_status(r)) return rc;
      return 0;
    }
    if (*gen_cmd) {
      std::vector<std::size_t> sizes = parse_sizes(gen_samples);
      if (sizes.size() == 1 && gen_parties > 1) sizes.assign(gen_parties, sizes[0]);
      for (const auto& p : gen_data(gen_features, sizes, gen_seed, gen_out))
        std::printf("%s\n", p.c_str());
      return 0;
    }
    if (*dump_cmd) {
      if (dump_d == 0) fail(ErrorKind::kConfig, "--d must be at least 1");
      std::fputs(dump_scheme(regen(dump_d)).c_str(), stdout);
      return 0;
    }
    if (*cost_cmd) {
      if (cost_m < 2) fail(ErrorKind::kConfig, "--M must be at least 2");
      CostPrediction p = cost_model(parse_protocol(cost_protocol), cost_m, cost_f, cost_n);
      auto counts = [](const ElementCounts& e) {
        return nlohmann::json{{"among_ips", e.among_ips}, {"ip_fp", e.ip_fp}, {"total", e.total()}};
      };
      nlohmann::json doc = {{"protocol", cost_protocol},
                            {"M", cost_m},
                            {"f", cost_f},
                            {"n", cost_n},
                            {"published", counts(*p.published)},
                            {"artifact", counts(p.artifact)}};
      std::printf("%s\n", doc.dump(2).c_str());
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "secdot: %s error: %s\n", std::string(to_string(e.kind())).c_str(),
                 e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "secdot: %s\n", e.what());
    return 1;
  }
  return 0;
}
