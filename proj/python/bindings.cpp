#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"

#include "infodist/codelen.hpp"
#include "infodist/container.hpp"
#include "infodist/distance.hpp"
#include "infodist/error.hpp"
#include "infodist/mock_server.hpp"
#include "infodist/session.hpp"
#include "infodist/tasks.hpp"

namespace py = pybind11;
using namespace infodist;

namespace {

// pybind11 holders cannot be pointers to const.
using ModelPtr = std::shared_ptr<EntropyModel>;

PyObject* g_error_type = nullptr;

// Reports cross the boundary as JSON so Python sees plain dicts.
py::object to_py(const nlohmann::ordered_json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

Tokens tokens_of(const EntropyModel& m, std::string_view text) { return m.tokenize(text); }

EvalOptions eval_options(const EntropyModel& m, const std::string& metric,
                         const std::string& variant, const std::string& mode,
                         const std::string& separator, unsigned jobs) {
  EvalOptions o;
  o.metric = parse_metric(metric);
  o.variant = parse_variant(variant);
  o.mode = parse_joint_mode(mode);
  if (!separator.empty()) o.separator = m.tokenize(separator);
  o.jobs = jobs;
  return o;
}

std::string_view as_bytes(const py::bytes& b) {
  char* data = nullptr;
  Py_ssize_t len = 0;
  PyBytes_AsStringAndSize(b.ptr(), &data, &len);
  return {data, static_cast<std::size_t>(len)};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Compression-based information distance";

  g_error_type = PyErr_NewException("infodist._core.InfodistError", PyExc_RuntimeError, nullptr);
  m.add_object("InfodistError", py::handle(g_error_type));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::handle(g_error_type)(e.what());
      inst.attr("code") = std::string(errc_name(e.code()));
      PyErr_SetObject(g_error_type, inst.ptr());
    }
  });

  py::class_<EntropyModel, ModelPtr>(m, "Model")
      .def(py::init([](const std::string& selector) {
             return std::const_pointer_cast<EntropyModel>(make_model(ModelSelector::parse(selector)));
           }),
           py::arg("selector") = "builtin:adaptive:2")
      .def_property_readonly("model_id", [](const EntropyModel& s) { return s.descriptor().model_id; })
      .def_property_readonly("vocab_size", [](const EntropyModel& s) { return s.vocab().size; })
      .def_property_readonly("eos_id", [](const EntropyModel& s) { return s.vocab().eos_id; })
      .def_property_readonly("hash", [](const EntropyModel& s) { return s.descriptor().hash(); })
      .def("tokenize", [](const EntropyModel& s, const std::string& text) { return s.tokenize(text); })
      .def("detokenize", [](const EntropyModel& s, const Tokens& ids) {
        return py::bytes(s.detokenize(ids));
      })
      .def("score",
           [](const EntropyModel& s, const Tokens& seq, const Tokens& context) {
             py::gil_scoped_release nogil;
             return score_sequence(s, seq, context);
           },
           py::arg("seq"), py::arg("context") = Tokens{});

  m.def("codelen",
        [](const ModelPtr& model, const std::string& text, const std::string& context,
           const std::string& variant) {
          const Tokens x = tokens_of(*model, text);
          const Tokens y = tokens_of(*model, context);
          CodeLengthReport r;
          {
            py::gil_scoped_release nogil;
            r = codelen(*model, x, y, parse_variant(variant));
          }
          return to_py(r.to_json());
        },
        py::arg("model"), py::arg("text"), py::arg("context") = "",
        py::arg("variant") = "logprob");

  m.def("distance",
        [](const ModelPtr& model, const std::string& x, const std::string& y,
           const std::string& metric, const std::string& variant, const std::string& mode,
           const std::string& separator) {
          DistanceOptions o;
          o.metric = parse_metric(metric);
          o.joint.variant = parse_variant(variant);
          o.joint.mode = parse_joint_mode(mode);
          if (!separator.empty()) o.joint.separator = model->tokenize(separator);
          DistanceReport r;
          {
            py::gil_scoped_release nogil;
            r = distance(*model, x, y, o);
          }
          return to_py(r.to_json());
        },
        py::arg("model"), py::arg("x"), py::arg("y"), py::arg("metric") = "mean",
        py::arg("variant") = "logprob", py::arg("mode") = "conditional",
        py::arg("separator") = "");

  m.def("compress",
        [](const ModelPtr& model, const py::bytes& data, std::size_t chunk_chars,
           std::optional<unsigned> total_log2, unsigned jobs) {
          const std::string text(as_bytes(data));
          std::vector<std::uint8_t> out;
          {
            py::gil_scoped_release nogil;
            out = compress(*model, text, {chunk_chars, total_log2, jobs});
          }
          return py::bytes(reinterpret_cast<const char*>(out.data()), out.size());
        },
        py::arg("model"), py::arg("data"), py::arg("chunk_chars") = 2500,
        py::arg("total_log2") = std::nullopt, py::arg("jobs") = 1);

  m.def("decompress",
        [](const ModelPtr& model, const py::bytes& archive, unsigned jobs) {
          const auto view = as_bytes(archive);
          const std::vector<std::uint8_t> bytes(view.begin(), view.end());
          std::string text;
          {
            py::gil_scoped_release nogil;
            text = decompress(*model, bytes, jobs);
          }
          return py::bytes(text);
        },
        py::arg("model"), py::arg("archive"), py::arg("jobs") = 1);

  m.def("eval_sts",
        [](const ModelPtr& model, const std::string& jsonl, const std::string& metric,
           const std::string& variant, const std::string& mode, const std::string& separator,
           unsigned jobs) {
          const auto records = load_sts(jsonl);
          const auto o = eval_options(*model, metric, variant, mode, separator, jobs);
          StsResult r;
          {
            py::gil_scoped_release nogil;
            r = eval_sts(*model, records, o);
          }
          return to_py(r.to_json(records));
        },
        py::arg("model"), py::arg("jsonl"), py::arg("metric") = "mean",
        py::arg("variant") = "logprob", py::arg("mode") = "conditional",
        py::arg("separator") = "", py::arg("jobs") = 1);

  m.def("eval_classify",
        [](const ModelPtr& model, const std::string& records, const std::string& exemplars,
           const std::string& metric, const std::string& variant, const std::string& shot,
           unsigned jobs) {
          const auto data = load_classify(records, exemplars);
          auto o = eval_options(*model, metric, variant, "conditional", "", jobs);
          o.shot = parse_shot(shot);
          ClassifyResult r;
          {
            py::gil_scoped_release nogil;
            r = eval_classify(*model, data, o);
          }
          return to_py(r.to_json(data));
        },
        py::arg("model"), py::arg("records"), py::arg("exemplars"), py::arg("metric") = "mean",
        py::arg("variant") = "logprob", py::arg("shot") = "one", py::arg("jobs") = 1);

  m.def("eval_rerank",
        [](const ModelPtr& model, const std::string& queries, const std::string& candidates,
           const std::string& qrels, std::size_t k, const std::string& metric,
           const std::string& variant, unsigned jobs) {
          const auto records = load_rerank(queries, candidates, qrels);
          auto o = eval_options(*model, metric, variant, "conditional", "", jobs);
          o.k = k;
          RerankResult r;
          {
            py::gil_scoped_release nogil;
            r = eval_rerank(*model, records, o);
          }
          return to_py(r.to_json(records));
        },
        py::arg("model"), py::arg("queries"), py::arg("candidates"), py::arg("qrels"),
        py::arg("k") = 10, py::arg("metric") = "mean", py::arg("variant") = "logprob",
        py::arg("jobs") = 1);

  m.def("sts_grid",
        [](const ModelPtr& model, const std::string& jsonl, unsigned jobs) {
          const auto records = load_sts(jsonl);
          const auto o = eval_options(*model, "mean", "logprob", "conditional", "", jobs);
          MetricGrid g;
          {
            py::gil_scoped_release nogil;
            g = metric_grid(*model, std::span<const StsRecord>(records), o);
          }
          return to_py(g.to_json());
        },
        py::arg("model"), py::arg("jsonl"), py::arg("jobs") = 1);

  m.def("spearman", [](const std::vector<double>& a, const std::vector<double>& b) {
    return spearman(a, b);
  });
  m.def("dcg_at_k", [](const std::vector<int>& rel, std::size_t k) { return dcg_at_k(rel, k); });
  m.def("checksum", [](const py::bytes& data) { return plaintext_checksum(as_bytes(data)); });

  py::class_<MockServer>(m, "MockServer")
      .def(py::init([](const ModelPtr& model, std::size_t context_window, bool distribution) {
             MockServer::Options o;
             o.model = model;
             o.context_window = context_window;
             o.distribution = distribution;
             return std::make_unique<MockServer>(std::move(o));
           }),
           py::arg("model"), py::arg("context_window") = 4096, py::arg("distribution") = true)
      .def("start", &MockServer::start, py::arg("host") = "127.0.0.1", py::arg("port") = 0)
      .def("stop", &MockServer::stop, py::call_guard<py::gil_scoped_release>())
      .def_property_readonly("request_count", &MockServer::request_count);
}
