#include "eegdgr/csp.hpp"
#include "eegdgr/csv_recording.hpp"
#include "eegdgr/dataset.hpp"
#include "eegdgr/edf.hpp"
#include "eegdgr/evaluation.hpp"
#include "eegdgr/frame.hpp"
#include "eegdgr/model_io.hpp"
#include "eegdgr/synthetic.hpp"
#include "eegdgr/voting.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace eegdgr;

namespace {

py::bytes to_bytes(const std::vector<std::uint8_t>& v) {
  return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

std::vector<std::uint8_t> from_bytes(const py::bytes& b) {
  const std::string s = b;
  return {s.begin(), s.end()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "EEG classifier: CSP and a learnable channel graph feeding a CNN";

  py::register_exception<edf::EdfError>(m, "EdfError", PyExc_ValueError);
  py::register_exception<CsvError>(m, "CsvError", PyExc_ValueError);
  py::register_exception<DatasetError>(m, "DatasetError", PyExc_ValueError);
  py::register_exception<PipelineError>(m, "PipelineError", PyExc_ValueError);
  py::register_exception<csp::CspError>(m, "CspError", PyExc_ValueError);
  py::register_exception<net::NetError>(m, "NetError", PyExc_ValueError);
  py::register_exception<net::ModelIoError>(m, "ModelIoError", PyExc_ValueError);
  py::register_exception<stream::FrameError>(m, "FrameError", PyExc_ValueError);
  py::register_exception<stream::VotingError>(m, "VotingError", PyExc_ValueError);

  py::class_<Annotation>(m, "Annotation")
      .def(py::init<double, double, std::string>(), py::arg("onset_s"), py::arg("duration_s"), py::arg("text"))
      .def_readwrite("onset_s", &Annotation::onset_s)
      .def_readwrite("duration_s", &Annotation::duration_s)
      .def_readwrite("text", &Annotation::text)
      .def("__eq__", [](const Annotation& a, const Annotation& b) { return a == b; })
      .def("__repr__", [](const Annotation& a) {
        return "Annotation(" + std::to_string(a.onset_s) + ", " + std::to_string(a.duration_s) + ", '" + a.text + "')";
      });

  py::class_<Recording>(m, "Recording")
      .def(py::init<>())
      .def_readwrite("channel_labels", &Recording::channel_labels)
      .def_readwrite("sampling_rate", &Recording::sampling_rate)
      .def_readwrite("data", &Recording::data)
      .def_readwrite("events", &Recording::events)
      .def_readwrite("source", &Recording::source);

  py::class_<Epoch>(m, "Epoch")
      .def(py::init<Matrix, int>(), py::arg("data"), py::arg("label"))
      .def_readwrite("data", &Epoch::data)
      .def_readwrite("label", &Epoch::label);

  m.def("read_edf", [](const std::filesystem::path& p) { return edf::read_edf_file(p); }, py::arg("path"));
  m.def("parse_tal", [](const py::bytes& b) { return edf::parse_tal(from_bytes(b)); }, py::arg("annotation_bytes"));
  m.def("load_csv", [](const std::filesystem::path& p) { return load_local_csv(p); }, py::arg("path"));
  m.def("write_csv", &write_local_csv, py::arg("path"), py::arg("recording"));
  m.def("segment", &segment, py::arg("recording"), py::arg("window"), py::arg("overlap"), py::arg("labels"));

  m.def(
      "load_dataset",
      [](const std::filesystem::path& path, const std::string& kind, int window, double overlap) {
        DatasetSpec s;
        s.kind = parse_dataset_kind(kind);
        s.path = path;
        s.window = window;
        s.overlap = overlap;
        return load_dataset(s).epochs;
      },
      py::arg("path"), py::arg("kind") = "csv", py::arg("window") = 0, py::arg("overlap") = 0.5);

  py::class_<synthetic::SyntheticSpec>(m, "SyntheticSpec")
      .def(py::init<>())
      .def_readwrite("channels", &synthetic::SyntheticSpec::channels)
      .def_readwrite("classes", &synthetic::SyntheticSpec::classes)
      .def_readwrite("window", &synthetic::SyntheticSpec::window)
      .def_readwrite("sampling_rate", &synthetic::SyntheticSpec::sampling_rate)
      .def_readwrite("epochs_per_class", &synthetic::SyntheticSpec::epochs_per_class)
      .def_readwrite("boost", &synthetic::SyntheticSpec::boost)
      .def_readwrite("directions_per_class", &synthetic::SyntheticSpec::directions_per_class)
      .def_readwrite("ar_coefficient", &synthetic::SyntheticSpec::ar_coefficient)
      .def_readwrite("seed", &synthetic::SyntheticSpec::seed);
  m.def("synthetic_epochs", &synthetic::synthetic_epochs, py::arg("spec") = synthetic::SyntheticSpec{});
  m.def("synthetic_recording", &synthetic::synthetic_recording, py::arg("spec"), py::arg("class_sequence"),
        py::arg("samples_per_block"), py::arg("stream_seed"));

  py::class_<csp::CspModel>(m, "CspModel")
      .def_readonly("w", &csp::CspModel::w)
      .def_readonly("class_order", &csp::CspModel::class_order)
      .def_readonly("per_class_eigvals", &csp::CspModel::per_class_eigvals)
      .def("apply", [](const csp::CspModel& c, const Matrix& e) { return csp::apply_csp(c, e); });
  m.def("fit_csp", [](const std::vector<Epoch>& e, int k) { return csp::fit_csp(e, k); }, py::arg("epochs"),
        py::arg("num_classes"));

  py::class_<net::TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &net::TrainConfig::learning_rate)
      .def_readwrite("epochs", &net::TrainConfig::epochs)
      .def_readwrite("patience", &net::TrainConfig::patience)
      .def_readwrite("dropout_rate", &net::TrainConfig::dropout_rate)
      .def_readwrite("conv_depth", &net::TrainConfig::conv_depth)
      .def_readwrite("hidden", &net::TrainConfig::hidden)
      .def_readwrite("seed", &net::TrainConfig::seed);

  py::class_<net::EpochRecord>(m, "EpochRecord")
      .def_readonly("epoch", &net::EpochRecord::epoch)
      .def_readonly("train_loss", &net::EpochRecord::train_loss)
      .def_readonly("test_accuracy", &net::EpochRecord::test_accuracy);

  py::class_<net::ClassifierModel>(m, "Model")
      .def_property_readonly("num_channels", &net::ClassifierModel::num_channels)
      .def_property_readonly("num_classes", &net::ClassifierModel::num_classes)
      .def_readonly("window", &net::ClassifierModel::window)
      .def_property_readonly("adjacency", [](const net::ClassifierModel& mdl) { return mdl.adjacency.matrix(); })
      .def_readonly("csp", &net::ClassifierModel::csp)
      .def("predict", [](const net::ClassifierModel& mdl, const Matrix& x) { return net::predict(mdl, x); },
           py::arg("epoch"))
      .def("predict_class",
           [](const net::ClassifierModel& mdl, const Matrix& x) { return net::predicted_class(mdl, net::predict(mdl, x)); },
           py::arg("epoch"))
      .def("accuracy", [](const net::ClassifierModel& mdl, const std::vector<Epoch>& e) { return net::accuracy(mdl, e); })
      .def("to_bytes", [](const net::ClassifierModel& mdl) { return to_bytes(net::serialize_model(mdl)); })
      .def_static("from_bytes", [](const py::bytes& b) { return net::deserialize_model(from_bytes(b)); })
      .def("save", [](const net::ClassifierModel& mdl, const std::filesystem::path& p) { net::save_model(mdl, p); })
      .def_static("load", [](const std::filesystem::path& p) { return net::load_model(p); });

  m.def(
      "train",
      [](const std::vector<Epoch>& epochs, const net::TrainConfig& cfg, std::uint64_t split_seed) {
        SplitSpec spec;
        spec.seed = split_seed;
        const SplitResult split = split_and_batch(epochs, spec);
        py::gil_scoped_release release;
        net::TrainResult r = net::train_model(split.train_batches, split.test, cfg);
        py::gil_scoped_acquire acquire;
        return py::make_tuple(r.model, r.history, r.best_epoch, split.test);
      },
      py::arg("epochs"), py::arg("config") = net::TrainConfig{}, py::arg("split_seed") = 0,
      "Stratified split, then training. Returns (model, history, best_epoch, test_epochs).");

  m.def(
      "evaluate_json", [](const net::ClassifierModel& mdl, const std::vector<Epoch>& e) { return evaluation_json(evaluate(mdl, e), -1); },
      py::arg("model"), py::arg("epochs"));
  m.def(
      "latency_json",
      [](const net::ClassifierModel& mdl, double rate, int runs) { return latency_json(latency_report(mdl, rate, runs), -1); },
      py::arg("model"), py::arg("sampling_rate"), py::arg("runs") = metrics::kMinLatencyRuns);

  m.def(
      "confusion_matrix",
      [](const std::vector<int>& p, const std::vector<int>& l, int k) { return metrics::confusion_matrix(p, l, k).counts; },
      py::arg("preds"), py::arg("labels"), py::arg("num_classes"));
  m.def(
      "roc_auc_ovr",
      [](const std::vector<Vector>& rows, const std::vector<int>& labels, int k) {
        const auto r = metrics::roc_auc_ovr(rows, labels, k);
        std::vector<std::optional<double>> out;
        for (const auto& c : r.per_class) out.push_back(c.auc);
        return py::make_tuple(out, r.macro_auc);
      },
      py::arg("scores"), py::arg("labels"), py::arg("num_classes"), "Returns (per-class AUCs, macro AUC).");

  py::class_<stream::VoteDecision>(m, "VoteDecision")
      .def_readonly("class_id", &stream::VoteDecision::class_id)
      .def_readonly("votes", &stream::VoteDecision::votes)
      .def_readonly("confidence", &stream::VoteDecision::confidence);
  py::class_<stream::DecisionWindow>(m, "DecisionWindow")
      .def(py::init<int, std::size_t, int>(), py::arg("num_classes"), py::arg("capacity") = stream::kVoteWindow,
           py::arg("threshold") = stream::kVoteThreshold)
      .def("update", &stream::DecisionWindow::update, py::arg("pred"), py::arg("confidence") = 1.0)
      .def("__len__", &stream::DecisionWindow::size)
      .def("contents", &stream::DecisionWindow::contents);

  m.def(
      "encode_sample",
      [](const std::vector<float>& v) { return to_bytes(stream::encode_frame(stream::SampleFrame{v})); },
      py::arg("values"));
  m.def(
      "decode_sample",
      [](const py::bytes& b) {
        const auto f = stream::decode_frame(from_bytes(b));
        const auto* s = std::get_if<stream::SampleFrame>(&f);
        if (!s) throw stream::FrameError(stream::FrameErrorKind::unknown_kind, "not a SAMPLE frame");
        return s->values;
      },
      py::arg("frame"));
}
