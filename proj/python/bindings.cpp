#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "scatterhsd/config.hpp"
#include "scatterhsd/corpus.hpp"
#include "scatterhsd/error.hpp"
#include "scatterhsd/geometry.hpp"
#include "scatterhsd/infoplane.hpp"
#include "scatterhsd/scatter.hpp"
#include "scatterhsd/trainer.hpp"

namespace py = pybind11;
using namespace scatterhsd;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

PointCloud to_cloud(const Array& a) {
  if (a.ndim() != 2 || a.shape(1) != 3) throw InvalidInput("expected an (N, 3) array");
  PointCloud c;
  c.points.resize(static_cast<std::size_t>(a.shape(0)));
  const double* p = a.data();
  for (std::size_t i = 0; i < c.points.size(); ++i) c.points[i] = {p[3 * i], p[3 * i + 1], p[3 * i + 2]};
  return c;
}

Array to_array(const PointCloud& c) {
  Array out({static_cast<py::ssize_t>(c.size()), py::ssize_t{3}});
  double* p = out.mutable_data();
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (int d = 0; d < 3; ++d) p[3 * i + d] = c.points[i][d];
  }
  return out;
}

py::dict report_dict(const trainer::EvalReport& r) {
  py::dict d;
  d["oa"] = r.oa;
  d["macc"] = r.macc;
  d["cd_x1000"] = r.cd_x1000;
  d["miou"] = r.miou;
  d["ciou"] = r.ciou;
  d["random_miou"] = r.random_miou;
  d["samples"] = r.samples;
  py::list levels;
  for (const auto& l : r.per_level) levels.append(py::make_tuple(l.oa, l.macc));
  d["per_level"] = levels;
  d["warnings"] = r.warnings;
  return d;
}

}  // namespace

PYBIND11_MODULE(_scatterhsd, m) {
  m.doc() = "Scattered point cloud completion and hierarchical self-distillation";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<NumericsError>(m, "NumericsError", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  m.def("normalize", [](const Array& a) { return to_array(geometry::normalize(to_cloud(a))); });
  m.def("fps", [](const Array& a, std::size_t k, std::size_t start) { return geometry::fps(to_cloud(a), k, start); },
        py::arg("points"), py::arg("m"), py::arg("start") = 0);
  m.def("knn", [](const Array& a, std::size_t center, std::size_t k) {
    return geometry::knn(to_cloud(a), center, k).neighbor_indices;
  });
  m.def("chamfer", [](const Array& a, const Array& b) { return geometry::chamfer(to_cloud(a), to_cloud(b)); });
  m.def("nearest_map", [](const Array& a, const Array& b) { return geometry::nearest_map(to_cloud(a), to_cloud(b)); });

  m.def("gen_shape", [](int class_id, std::uint64_t seed, std::size_t n) {
    const auto c = corpus::gen_shape(corpus::random_spec(class_id, seed), n);
    std::vector<int> labels = c.labels.value_or(std::vector<int>{});
    return py::make_tuple(to_array(c), labels);
  }, py::arg("class_id"), py::arg("seed"), py::arg("n") = corpus::kDenseSourceSize);
  m.def("class_name", [](int c) { return std::string(corpus::class_name(c)); });
  m.attr("NUM_CLASSES") = corpus::kNumClasses;

  m.def("scatter_sample", [](const Array& dense, std::size_t seeds, std::size_t neighbors, std::uint64_t rng_seed) {
    const auto c = to_cloud(dense);
    return to_array(scatter::scatter_sample(c, {seeds, neighbors, c.size(), rng_seed}));
  }, py::arg("dense"), py::arg("seeds"), py::arg("neighbors"), py::arg("rng_seed") = 0);
  m.def("multi_view", [](const Array& dense, std::size_t seeds, std::size_t neighbors, std::size_t views,
                         std::uint64_t rng_seed) {
    const auto c = to_cloud(dense);
    std::vector<Array> out;
    for (const auto& v : scatter::multi_view(c, {seeds, neighbors, c.size(), rng_seed}, views)) out.push_back(to_array(v));
    return out;
  }, py::arg("dense"), py::arg("seeds"), py::arg("neighbors"), py::arg("views"), py::arg("rng_seed") = 0);

  m.def("bin_activations", [](const std::vector<double>& z, std::size_t batch, std::size_t dim, std::size_t bins) {
    return infoplane::bin_activations(z, batch, dim, bins);
  });
  m.def("mutual_information", &infoplane::mutual_information);

  m.def("learning_rate", [](std::size_t epoch, const std::vector<std::string>& overrides) {
    config::Config cfg;
    for (const auto& o : overrides) cfg.apply_override(o);
    return trainer::learning_rate(cfg.train(), epoch);
  }, py::arg("epoch"), py::arg("overrides") = std::vector<std::string>{});

  m.def("default_config", [] {
    std::ostringstream os;
    config::Config{}.dump(os);
    return os.str();
  });

  m.def("train_and_evaluate", [](const std::vector<std::string>& overrides) {
    config::Config cfg;
    for (const auto& o : overrides) cfg.apply_override(o);
    const auto mc = cfg.model();
    const auto tc = cfg.train();
    trainer::TrainResult result;
    trainer::EvalReport report;
    {
      py::gil_scoped_release release;
      const auto split = corpus::gen_split(static_cast<int>(cfg.get_uint("corpus.classes")),
                                           cfg.get_uint("corpus.per_class"), cfg.get_uint("corpus.seed"));
      const auto data = trainer::prepare(split, cfg.scatter(), mc.upstream.target_points, tc.views, mc.hfe.classes);
      trainer::Model model(mc, tc.seed);
      result = trainer::train(model, data, tc);
      report = trainer::evaluate(model, data.test, data.classes, tc.mode);
    }
    py::dict d = report_dict(report);
    d["checkpoint_hash"] = result.checkpoint_hash;
    py::list totals;
    for (const auto& s : result.steps) totals.append(s.total);
    d["step_totals"] = totals;
    return d;
  }, py::arg("overrides") = std::vector<std::string>{});
}
