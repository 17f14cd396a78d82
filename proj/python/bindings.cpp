#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <string>
#include <vector>

#include "corelens/analysis.hpp"
#include "corelens/ingest.hpp"
#include "corelens/layout.hpp"
#include "corelens/nrdf.hpp"
#include "corelens/render.hpp"
#include "corelens/samples.hpp"

namespace py = pybind11;
using namespace corelens;

namespace {

py::bytes to_py(const std::vector<std::byte>& b) {
  return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
}

std::vector<std::byte> from_py(const py::bytes& b) {
  const std::string s = b;
  std::vector<std::byte> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = static_cast<std::byte>(s[i]);
  return out;
}

AssemblyType type_arg(const std::string& s) { return parse_assembly_type(s); }

std::uint32_t def_at(const Reactor& r, const std::string& type, const std::string& cell) {
  const auto [row, col] = parse_cell_label(r.labels(), cell);
  const auto idx = r.assembly_at(type_arg(type), row, col);
  if (!idx) fail(ErrorCode::not_found, "no " + type + " assembly at " + cell);
  return *idx;
}

std::uint32_t def_named(const Reactor& r, const std::string& name) {
  for (std::uint32_t i = 0; i < r.assembly_defs().size(); ++i) {
    if (r.assembly_defs()[i].name() == name) return i;
  }
  fail(ErrorCode::not_found, "no assembly definition '" + name + "'");
}

py::dict table_dict(const Table& t) {
  py::list rows;
  for (std::size_t i = 0; i < t.values.rows; ++i) {
    py::list row;
    for (std::size_t j = 0; j < t.values.cols; ++j) {
      const double v = t.values(i, j);
      row.append(std::isnan(v) ? py::object(py::none()) : py::object(py::float_(v)));
    }
    rows.append(row);
  }
  py::dict d;
  d["name"] = t.name;
  d["row_labels"] = t.row_labels;
  d["column_labels"] = t.column_labels;
  d["values"] = rows;
  return d;
}

py::dict result_dict(const AnalysisResult& r) {
  py::list tables;
  for (const auto& t : r.tables) tables.append(table_dict(t));
  py::dict series;
  for (const auto& s : r.series) series[py::str(s.name)] = s.points;
  py::dict d;
  d["tool"] = r.tool;
  d["created_at"] = iso8601(r.created_at);
  d["tables"] = tables;
  d["series"] = series;
  d["scalars"] = r.scalars;
  return d;
}

}  // namespace

PYBIND11_MODULE(_corelens, m) {
  m.doc() = "Reactor data model, NRDF container, analysis and SVG views";

  // Leaked on purpose: the type must outlive interpreter teardown.
  static auto* error = new py::exception<Error>(m, "CorelensError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      auto type = py::reinterpret_borrow<py::object>(error->ptr());
      py::object exc = type(py::str(e.what()));
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error->ptr(), exc.ptr());
    }
  });

  py::class_<Reactor>(m, "Reactor")
      .def_property_readonly("name", &Reactor::name)
      .def_property_readonly("type", [](const Reactor& r) { return std::string(to_string(r.type())); })
      .def_property_readonly("size", &Reactor::size)
      .def_property_readonly("units", &Reactor::units)
      .def_property_readonly("assembly_names",
                             [](const Reactor& r) {
                               std::vector<std::string> out;
                               for (const auto& d : r.assembly_defs()) out.push_back(d.name());
                               return out;
                             })
      .def_property_readonly("rod_names",
                             [](const Reactor& r) {
                               std::vector<std::string> out;
                               for (const auto& d : r.rod_defs()) out.push_back(d.name);
                               return out;
                             })
      .def("assembly_at",
           [](const Reactor& r, const std::string& type, const std::string& cell)
               -> std::optional<std::string> {
             const auto [row, col] = parse_cell_label(r.labels(), cell);
             const auto idx = r.assembly_at(type_arg(type), row, col);
             if (!idx) return std::nullopt;
             return r.assembly_defs()[*idx].name();
           },
           py::arg("type"), py::arg("cell"))
      .def("assembly_size",
           [](const Reactor& r, const std::string& assembly) {
             return r.assembly_defs()[def_named(r, assembly)].size();
           })
      .def("features",
           [](const Reactor& r, const std::string& assembly) {
             return AssemblyView(r, def_named(r, assembly)).feature_names();
           })
      .def("axial_series",
           [](const Reactor& r, const std::string& assembly, const std::string& pin,
              const std::string& feature, double time) {
             const AssemblyView v(r, def_named(r, assembly));
             const auto [row, col] = parse_cell_label(v.labels(), pin);
             std::vector<std::pair<double, double>> out;
             for (const auto& p : axial_series(v, row, col, feature, time)) out.emplace_back(p.z, p.value);
             return out;
           },
           py::arg("assembly"), py::arg("pin"), py::arg("feature"), py::arg("time") = 0.0)
      .def("to_bytes", [](const Reactor& r) { return to_py(nrdf::encode(store_reactor(r))); })
      .def("__eq__", [](const Reactor& a, const Reactor& b) { return a == b; })
      .def("__repr__", [](const Reactor& r) {
        return "<Reactor '" + r.name() + "' " + std::string(to_string(r.type())) + " " +
               std::to_string(r.size()) + "x" + std::to_string(r.size()) + ">";
      });

  m.def("make_preset", &samples::make_preset, py::arg("name"), "Synthetic '3a' or 'sfr7' core");
  m.def("from_bytes", [](const py::bytes& b) { return load_reactors(nrdf::decode(from_py(b))); },
        "Every reactor in an NRDF byte string");
  m.def("open", &open_reactors, py::arg("path"), "Every reactor in an NRDF file");
  m.def("save",
        [](const std::string& path, const std::vector<const Reactor*>& reactors) {
          save_reactors(path, reactors);
        },
        py::arg("path"), py::arg("reactors"));
  m.def("dump",
        [](const py::bytes& b, bool full) {
          return nrdf::dump(nrdf::decode(from_py(b)), full ? nrdf::DumpMode::full : nrdf::DumpMode::tree);
        },
        py::arg("data"), py::arg("full") = false);
  m.def("ingest_csv",
        [](const Reactor& skeleton, const std::string& text, const std::string& assembly) {
          return ingest_csv(skeleton, text, IngestOptions{assembly});
        },
        py::arg("skeleton"), py::arg("csv"), py::arg("assembly") = "");

  m.def("pin_diff",
        [](const Reactor& input, const Reactor& reference, const std::string& feature,
           const std::vector<std::string>& pins, const std::string& assembly, double time) {
          const std::uint32_t a = assembly.empty() ? def_at(input, "fuel", cell_label(input.labels(), input.size() / 2, input.size() / 2))
                                                   : def_named(input, assembly);
          const std::uint32_t b = assembly.empty() ? def_at(reference, "fuel", cell_label(reference.labels(), reference.size() / 2, reference.size() / 2))
                                                   : def_named(reference, assembly);
          return result_dict(pin_diff(AssemblyView(input, a), AssemblyView(reference, b), feature, pins, time));
        },
        py::arg("input"), py::arg("reference"), py::arg("feature"), py::arg("pins"),
        py::arg("assembly") = "", py::arg("time") = 0.0,
        "Normalized percentage difference; the default assembly is the central fuel one");

  m.def("kmeans",
        [](const std::vector<std::vector<double>>& points, std::size_t k, std::uint64_t seed,
           std::size_t max_iter) {
          if (points.empty()) fail(ErrorCode::invalid_argument, "no points");
          Matrix mtx(points.size(), points[0].size());
          for (std::size_t i = 0; i < points.size(); ++i) {
            if (points[i].size() != mtx.cols) fail(ErrorCode::shape_error, "ragged points");
            for (std::size_t j = 0; j < mtx.cols; ++j) mtx(i, j) = points[i][j];
          }
          const auto res = kmeans(mtx, k, seed, max_iter);
          std::vector<std::vector<double>> centroids;
          for (std::size_t j = 0; j < res.centroids.rows; ++j) {
            const auto row = res.centroids.row(j);
            centroids.emplace_back(row.begin(), row.end());
          }
          py::dict d;
          d["assignments"] = res.assignments;
          d["centroids"] = centroids;
          d["inertia"] = res.inertia;
          d["iterations"] = res.iterations;
          d["converged"] = res.converged;
          d["inertia_history"] = res.inertia_history;
          return d;
        },
        py::arg("points"), py::arg("k"), py::arg("seed") = 0, py::arg("max_iter") = 100);

  m.def("render_core",
        [](const Reactor& r, const std::string& type) {
          return render_core(r, type.empty() ? std::nullopt : std::optional(type_arg(type)));
        },
        py::arg("reactor"), py::arg("type") = "");
  m.def("render_assembly",
        [](const Reactor& r, const std::string& assembly, const std::string& feature, int level,
           const std::string& norm) {
          const AssemblyView v(r, def_named(r, assembly));
          ViewSpec spec;
          spec.axial_level = level;
          spec.feature = feature;
          if (!feature.empty()) {
            spec.kind = ViewKind::assembly_data;
            spec.scale = compute_scale(v, feature, 0.0, level, parse_scale_scope(norm));
          }
          return render_assembly(v, spec);
        },
        py::arg("reactor"), py::arg("assembly"), py::arg("feature") = "", py::arg("level") = 1,
        py::arg("norm") = "selected_level");
  m.def("render_plot", &render_plot, py::arg("series"), py::arg("title") = "",
        py::arg("x_label") = "", py::arg("y_label") = "");

  py::class_<Series>(m, "Series")
      .def(py::init([](std::string name, std::vector<std::pair<double, double>> points) {
             return Series{std::move(name), std::move(points)};
           }),
           py::arg("name"), py::arg("points"))
      .def_readonly("name", &Series::name)
      .def_readonly("points", &Series::points);
}
