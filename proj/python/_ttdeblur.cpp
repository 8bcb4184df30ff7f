#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ttdeblur/adapt.hpp"
#include "ttdeblur/error.hpp"
#include "ttdeblur/field_io.hpp"
#include "ttdeblur/fields.hpp"
#include "ttdeblur/metrics.hpp"
#include "ttdeblur/rsdm.hpp"
#include "ttdeblur/synth.hpp"

namespace py = pybind11;
using namespace ttdeblur;

namespace {

using Array = py::array_t<float, py::array::c_style | py::array::forcecast>;

Plane to_plane(const Array& a) {
  if (a.ndim() != 2) throw InvalidInput("expected a 2-D array");
  const auto h = static_cast<int>(a.shape(0));
  const auto w = static_cast<int>(a.shape(1));
  return Plane(h, w, std::vector<float>(a.data(), a.data() + a.size()));
}

Array from_planes(const std::vector<const Plane*>& planes) {
  const Shape s = planes.front()->shape();
  if (planes.size() == 1) {
    Array out({s.height, s.width});
    std::copy(planes[0]->data(), planes[0]->data() + planes[0]->size(), out.mutable_data());
    return out;
  }
  const auto c = static_cast<py::ssize_t>(planes.size());
  Array out({static_cast<py::ssize_t>(s.height), static_cast<py::ssize_t>(s.width), c});
  auto r = out.mutable_unchecked<3>();
  for (py::ssize_t k = 0; k < c; ++k) {
    for (int y = 0; y < s.height; ++y) {
      for (int x = 0; x < s.width; ++x) r(y, x, k) = (*planes[static_cast<std::size_t>(k)])(y, x);
    }
  }
  return out;
}

/// [H, W, k] -> k planes.
std::vector<Plane> split(const Array& a, int channels, const char* what) {
  if (a.ndim() != 3 || a.shape(2) != channels) {
    throw InvalidInput(std::string(what) + ": expected shape (H, W, " + std::to_string(channels) + ")");
  }
  const auto h = static_cast<int>(a.shape(0));
  const auto w = static_cast<int>(a.shape(1));
  std::vector<Plane> out(static_cast<std::size_t>(channels), Plane(h, w));
  auto r = a.unchecked<3>();
  for (int k = 0; k < channels; ++k) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) out[static_cast<std::size_t>(k)](y, x) = r(y, x, k);
    }
  }
  return out;
}

FlowField to_flow(const Array& a) {
  auto p = split(a, 2, "flow");
  return FlowField(std::move(p[0]), std::move(p[1]));
}

TrajectoryMap to_traj(const Array& a) {
  auto p = split(a, 2, "trajectory");
  return TrajectoryMap(std::move(p[0]), std::move(p[1]));
}

BlurConditionField to_cond(const Array& a) {
  auto p = split(a, 3, "condition");
  return BlurConditionField(std::move(p[0]), std::move(p[1]), std::move(p[2]));
}

Array cond_array(const BlurConditionField& c) { return from_planes({&c.x, &c.y, &c.z}); }

/// (H, W) gray or (H, W, C) with C in {1, 3}.
Frame to_frame(const Array& a) {
  if (a.ndim() == 2) return Frame::from_planes({to_plane(a)});
  if (a.ndim() == 3 && (a.shape(2) == 1 || a.shape(2) == 3)) {
    return Frame::from_planes(split(a, static_cast<int>(a.shape(2)), "frame"));
  }
  throw InvalidInput("frame: expected shape (H, W) or (H, W, C) with C in {1, 3}");
}

Array frame_array(const Frame& f) {
  std::vector<Plane> planes;
  for (int c = 0; c < f.channels(); ++c) planes.push_back(f.plane(c));
  std::vector<const Plane*> ptrs;
  for (const auto& p : planes) ptrs.push_back(&p);
  return from_planes(ptrs);
}

std::vector<FlowField> to_flows(const std::vector<Array>& arrays) {
  std::vector<FlowField> out;
  for (const auto& a : arrays) out.push_back(to_flow(a));
  return out;
}

std::vector<BlurMagnitudeMap> to_mags(const std::vector<Array>& arrays) {
  std::vector<BlurMagnitudeMap> out;
  for (const auto& a : arrays) out.push_back({to_plane(a)});
  return out;
}

NeighborAverage parse_average(const std::string& s) {
  if (s == "elementwise") return NeighborAverage::elementwise;
  if (s == "scalar") return NeighborAverage::scalar;
  throw InvalidInput("mode must be 'elementwise' or 'scalar'");
}

py::tuple window_tuple(const Window& w) { return py::make_tuple(w.top, w.left, w.height, w.width); }

}  // namespace

PYBIND11_MODULE(_ttdeblur, m) {
  m.doc() = "Field math, blur synthesis, patch mining and metrics of the ttdeblur core.";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<OutOfRange>(m, "OutOfRangeError", PyExc_ValueError);
  py::register_exception<LoadError>(m, "LoadError", PyExc_OSError);

  m.def(
      "accumulate_training_trajectory",
      [](const std::vector<Array>& fwd, const std::vector<Array>& bwd) {
        const auto t = accumulate_training_trajectory(to_flows(fwd), to_flows(bwd));
        return from_planes({&t.u, &t.v});
      },
      py::arg("forward_flows"), py::arg("backward_flows"));
  m.def(
      "accumulate_test_trajectory",
      [](const std::vector<Array>& flows) {
        const auto t = accumulate_test_trajectory(to_flows(flows));
        return from_planes({&t.u, &t.v});
      },
      py::arg("flows"));
  m.def(
      "magnitude_ground_truth",
      [](const Array& traj, double tau) {
        const auto g = magnitude_ground_truth(to_traj(traj), Tau(tau));
        return from_planes({&g.m});
      },
      py::arg("trajectory"), py::arg("tau"));
  m.def(
      "orientation_field",
      [](const Array& traj, float eps) {
        const auto o = orientation_field(to_traj(traj), eps);
        return from_planes({&o.ox, &o.oy});
      },
      py::arg("trajectory"), py::arg("eps") = kDefaultOrientationEps);
  m.def(
      "adapt_magnitude",
      [](const Array& center, const std::vector<Array>& neighbors, const std::string& mode) {
        const auto out = adapt_magnitude({to_plane(center)}, to_mags(neighbors), parse_average(mode));
        return from_planes({&out.m});
      },
      py::arg("center"), py::arg("neighbors"), py::arg("mode") = "elementwise");
  m.def(
      "assemble_condition",
      [](const Array& orient, const Array& mag) {
        auto o = split(orient, 2, "orientation");
        return cond_array(assemble_condition({std::move(o[0]), std::move(o[1])}, {to_plane(mag)}));
      },
      py::arg("orientation"), py::arg("magnitude"));

  m.def(
      "synthesize_blurred_frame",
      [](const std::vector<Array>& frames, const std::string& crf, double gamma) {
        std::vector<Frame> fs;
        for (const auto& a : frames) fs.push_back(to_frame(a));
        return frame_array(synth::synthesize_blurred_frame(fs, synth::CrfSpec::parse(crf, gamma)));
      },
      py::arg("frames"), py::arg("crf") = "identity", py::arg("gamma") = 2.2);
  m.def(
      "render_conditioned_blur",
      [](const Array& sharp, const Array& cond, double tau, int steps) {
        return frame_array(synth::render_conditioned_blur(to_frame(sharp), to_cond(cond), Tau(tau), steps));
      },
      py::arg("sharp"), py::arg("condition"), py::arg("tau"), py::arg("steps") = synth::kDefaultRenderSteps);

  m.def(
      "frame_sharpness_score",
      [](const Array& mag, int patch, int stride) -> py::object {
        const auto s = rsdm::frame_sharpness_score({to_plane(mag)}, patch, stride);
        if (!s) return py::none();
        return py::make_tuple(s->score, window_tuple(s->window));
      },
      py::arg("magnitude"), py::arg("patch") = rsdm::kPatchSize, py::arg("stride") = rsdm::kDefaultStride);
  m.def(
      "select_pseudo_sharp",
      [](const std::string& video, const std::vector<Array>& mags, double r, int patch, int stride,
         std::optional<std::pair<double, double>> ratio_range) {
        rsdm::SelectionOptions opt;
        opt.ratio = r;
        opt.patch = patch;
        opt.stride = stride;
        opt.ratio_range = ratio_range;
        const auto rep = rsdm::select_pseudo_sharp(video, to_mags(mags), opt);
        py::list sel;
        for (const auto& s : rep.selections) {
          py::dict d;
          d["frame"] = s.frame;
          d["window"] = window_tuple(s.window);
          d["score"] = s.score;
          sel.append(d);
        }
        py::dict out;
        out["selections"] = sel;
        out["eta_implied"] = rep.eta_implied;
        out["ineligible_frames"] = rep.ineligible_frames;
        return out;
      },
      py::arg("video_id"), py::arg("magnitudes"), py::arg("r") = rsdm::kDefaultRatio,
      py::arg("patch") = rsdm::kPatchSize, py::arg("stride") = rsdm::kDefaultStride,
      py::arg("ratio_range") = py::none());
  m.def("selection_count", &rsdm::selection_count, py::arg("r"), py::arg("total"));

  m.def(
      "psnr", [](const Array& a, const Array& b) { return metrics::psnr(to_frame(a), to_frame(b)); }, py::arg("a"),
      py::arg("b"));
  m.def(
      "ssim", [](const Array& a, const Array& b) { return metrics::ssim(to_frame(a), to_frame(b)); }, py::arg("a"),
      py::arg("b"));

  m.def(
      "read_flo",
      [](const std::filesystem::path& p) {
        const auto f = io::read_flo(p);
        return from_planes({&f.u, &f.v});
      },
      py::arg("path"));
  m.def(
      "write_flo", [](const std::filesystem::path& p, const Array& flow) { io::write_flo(p, to_flow(flow)); },
      py::arg("path"), py::arg("flow"));
  m.def(
      "read_bcf", [](const std::filesystem::path& p) { return cond_array(io::read_bcf(p)); }, py::arg("path"));
  m.def(
      "write_bcf", [](const std::filesystem::path& p, const Array& cond) { io::write_bcf(p, to_cond(cond)); },
      py::arg("path"), py::arg("condition"));
}
