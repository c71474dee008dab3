// Python bindings for the core operations.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "secdot/cost.hpp"
#include "secdot/dare.hpp"
#include "secdot/kernel.hpp"
#include "secdot/orchestrator.hpp"
#include "secdot/regen.hpp"

namespace py = pybind11;
using namespace secdot;

namespace {

py::array_t<double> to_numpy(const Matrix<double>& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) view(r, c) = m(r, c);
  return out;
}

Matrix<double> from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) fail(ErrorKind::kDimension, "expected a 2-d array");
  auto view = a.unchecked<2>();
  Matrix<double> m(view.shape(0), view.shape(1));
  for (py::ssize_t r = 0; r < view.shape(0); ++r)
    for (py::ssize_t c = 0; c < view.shape(1); ++c) m(r, c) = view(r, c);
  return m;
}

py::object parse_json(const std::string& text) {
  return py::module_::import("json").attr("loads")(text);
}

RunConfig make_config(const std::string& protocol, int parties, std::size_t features,
                      const py::object& samples, const std::string& domain,
                      unsigned scale_bits, const std::string& transport, std::uint64_t seed,
                      std::optional<double> sigma, bool verify) {
  RunConfig c;
  c.protocol = parse_protocol(protocol);
  c.parties = parties;
  c.features = features;
  if (py::isinstance<py::int_>(samples)) {
    c.samples.assign(std::max(parties, 0), samples.cast<std::size_t>());
  } else {
    c.samples = samples.cast<std::vector<std::size_t>>();
  }
  if (domain == "field") {
    c.domain = ScalarDomain::field(scale_bits);
  } else if (domain == "float") {
    c.domain = ScalarDomain::float64();
  } else {
    fail(ErrorKind::kConfig, "unknown domain '" + domain + "'");
  }
  if (transport == "tcp") {
    c.transport = TransportKind::kTcp;
  } else if (transport != "loopback") {
    fail(ErrorKind::kConfig, "unknown transport '" + transport + "'");
  }
  c.seed = seed;
  c.sigma = sigma;
  c.verify = verify;
  return c;
}

py::dict report_dict(const RunReport& r) {
  py::dict d = parse_json(r.to_json());
  d["gram_matrix"] = to_numpy(r.gram);
  if (r.kernel) d["kernel_matrix"] = to_numpy(r.kernel->entries);
  return d;
}

py::dict counts_dict(const ElementCounts& e) {
  py::dict d;
  d["among_ips"] = e.among_ips;
  d["ip_fp"] = e.ip_fp;
  d["total"] = e.total();
  return d;
}

}  // namespace

PYBIND11_MODULE(_secdot, m) {
  m.doc() = "secure multi-party gram matrix toolkit";

  static py::exception<Error> error(m, "SecdotError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error)(py::str(e.what()));
      exc.attr("kind") = std::string(to_string(e.kind()));
      exc.attr("exit_code") = e.exit_code();
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.attr("FIELD_MODULUS") = Fp::kModulus;

  m.def("field_inv", [](std::uint64_t x) { return Fp(x).inv().value(); }, py::arg("x"));
  m.def(
      "encode_real",
      [](double x, unsigned scale_bits) { return FixedPointCodec(scale_bits).encode(x).value(); },
      py::arg("x"), py::arg("scale_bits") = 16);
  m.def(
      "decode_dot",
      [](std::uint64_t w, unsigned scale_bits) {
        return FixedPointCodec(scale_bits).decode_dot(ScalarTraits<Fp>::from_wire(w));
      },
      py::arg("word"), py::arg("scale_bits") = 16);

  m.def(
      "muladd_encode",
      [](std::uint64_t s1, std::uint64_t s2, std::uint64_t s3, std::uint64_t r1, std::uint64_t r2,
         std::uint64_t r3, std::uint64_t r4) {
        auto e = muladd_encode(Fp(s1), Fp(s2), Fp(s3), Fp(r1), Fp(r2), Fp(r3), Fp(r4));
        return py::make_tuple(e.c1.value(), e.c2.value(), e.c3.value(), e.c4.value(),
                              e.c5.value());
      },
      "Field encoding of s1*s2 + s3 with randoms r1..r4.");
  m.def("muladd_decode", [](std::uint64_t c1, std::uint64_t c2, std::uint64_t c3,
                            std::uint64_t c4, std::uint64_t c5) {
    return muladd_decode(MulAddEncoding<Fp>{Fp(c1), Fp(c2), Fp(c3), Fp(c4), Fp(c5)}).value();
  });

  m.def(
      "regen",
      [](std::size_t d) {
        ReScheme s = regen(d);
        py::list leaves;
        for (const auto& l : s.leaves) {
          py::list offline;
          for (const auto& t : l.offline) offline.append(py::make_tuple(t.index, t.sign));
          py::dict leaf;
          leaf["a"] = l.a;
          leaf["b"] = l.b;
          leaf["c"] = l.c;
          leaf["d"] = l.d;
          leaf["offline"] = offline;
          leaves.append(leaf);
        }
        py::dict out;
        out["d"] = s.d;
        out["total_randoms"] = s.total_randoms;
        out["leaves"] = leaves;
        return out;
      },
      py::arg("d"));
  m.def("dump_scheme", [](std::size_t d) { return dump_scheme(regen(d)); }, py::arg("d"));

  m.def(
      "cost_model",
      [](const std::string& protocol, int parties, std::size_t features, std::size_t samples) {
        CostPrediction p = cost_model(parse_protocol(protocol), parties, features, samples);
        py::dict out;
        out["artifact"] = counts_dict(p.artifact);
        out["published"] = p.published ? py::object(counts_dict(*p.published)) : py::none();
        return out;
      },
      py::arg("protocol"), py::arg("parties"), py::arg("features"), py::arg("samples"));

  m.def(
      "run",
      [](const std::string& protocol, int parties, std::size_t features, py::object samples,
         const std::string& domain, unsigned scale_bits, const std::string& transport,
         std::uint64_t seed, std::optional<double> sigma, bool verify) {
        RunConfig c = make_config(protocol, parties, features, samples, domain, scale_bits,
                                  transport, seed, sigma, verify);
        RunReport r;
        {
          py::gil_scoped_release release;
          r = run(c);
        }
        return report_dict(r);
      },
      py::arg("protocol") = "escaped", py::arg("parties") = 2, py::arg("features") = 4,
      py::arg("samples") = 2, py::arg("domain") = "field", py::arg("scale_bits") = 16,
      py::arg("transport") = "loopback", py::arg("seed") = 1, py::arg("sigma") = py::none(),
      py::arg("verify") = false,
      "Runs one protocol; returns the report with gram_matrix (and kernel_matrix) as arrays.");

  m.def(
      "compare",
      [](int parties, std::size_t features, py::object samples, const std::string& domain,
         std::uint64_t seed) {
        RunConfig c = make_config("escaped", parties, features, samples, domain, 16, "loopback",
                                  seed, std::nullopt, false);
        CompareResult res;
        {
          py::gil_scoped_release release;
          res = compare(c);
        }
        py::dict d = parse_json(res.to_json());
        d["table"] = res.table();
        return d;
      },
      py::arg("parties") = 2, py::arg("features") = 4, py::arg("samples") = 2,
      py::arg("domain") = "field", py::arg("seed") = 1);

  m.def(
      "rbf_from_gram",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& g, double sigma) {
        return to_numpy(rbf_from_gram(from_numpy(g), sigma).entries);
      },
      py::arg("gram"), py::arg("sigma"));
}
