#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "commands.hpp"
#include "seedvos/crf.hpp"
#include "seedvos/error.hpp"
#include "seedvos/evaluation.hpp"
#include "seedvos/parallel.hpp"
#include "seedvos/segmenter.hpp"
#include "seedvos/synthetic.hpp"

namespace py = pybind11;
using namespace seedvos;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

DenseMap to_map(const FloatArray& a) {
    const auto info = a.request();
    const auto* p = static_cast<const float*>(info.ptr);
    if (info.ndim == 2) {
        const auto h = std::size_t(info.shape[0]), w = std::size_t(info.shape[1]);
        return DenseMap::planar(h, w, std::vector<float>(p, p + h * w));
    }
    if (info.ndim == 3) {
        const auto h = std::size_t(info.shape[0]), w = std::size_t(info.shape[1]), c = std::size_t(info.shape[2]);
        return DenseMap(h, w, c, std::vector<float>(p, p + h * w * c));
    }
    throw py::value_error("expected an array of rank 2 or 3");
}

py::array_t<float> to_array(const DenseMap& m) {
    std::vector<py::ssize_t> shape{py::ssize_t(m.height()), py::ssize_t(m.width())};
    if (!m.is_planar()) shape.push_back(py::ssize_t(m.channels()));
    py::array_t<float> out(shape);
    std::copy(m.data().begin(), m.data().end(), out.mutable_data());
    return out;
}

BinaryMask to_mask(const py::array_t<bool, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw py::value_error("expected a 2-D mask");
    BinaryMask m(std::size_t(a.shape(0)), std::size_t(a.shape(1)));
    const bool* p = a.data();
    for (PixelIndex i = 0; i < m.pixel_count(); ++i) m.set(i, p[i]);
    return m;
}

py::array_t<bool> to_array(const BinaryMask& m) {
    py::array_t<bool> out({py::ssize_t(m.height()), py::ssize_t(m.width())});
    bool* p = out.mutable_data();
    for (PixelIndex i = 0; i < m.pixel_count(); ++i) p[i] = m[i];
    return out;
}

RgbImage to_rgb(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 3 || a.shape(2) != 3) throw py::value_error("expected an H x W x 3 uint8 image");
    RgbImage img(std::size_t(a.shape(0)), std::size_t(a.shape(1)));
    std::copy(a.data(), a.data() + img.data.size(), img.data.begin());
    return img;
}

PipelineConfig parse_config(const std::string& text) {
    PipelineConfig config;
    if (!text.empty()) {
        try {
            cli::apply_config_json(nlohmann::json::parse(text), config);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
        }
    }
    config.validate();
    return config;
}

py::dict segment(const fs::path& manifest, const std::string& config_text, const std::string& mode) {
    const PipelineConfig config = parse_config(config_text);
    if (mode != "unsupervised" && mode != "semi") fail(ErrorCode::InvalidArgument, "mode must be unsupervised or semi");
    const Sequence seq = load_sequence(manifest);
    if (mode == "semi" && !seq.annotation0) fail(ErrorCode::InvalidArgument, "semi-supervised mode needs annotation0");

    SegmentationResult r;
    {
        py::gil_scoped_release release;
        r = mode == "semi" ? segment_semisupervised(seq, *seq.annotation0, config) : segment_sequence(seq, config);
    }
    const auto k = py::ssize_t(r.frames.size()), h = py::ssize_t(seq.height()), w = py::ssize_t(seq.width());
    py::array_t<bool> masks({k, h, w});
    py::array_t<float> prob({k, h, w});
    for (py::ssize_t f = 0; f < k; ++f) {
        const auto& fr = r.frames[std::size_t(f)];
        for (py::ssize_t i = 0; i < h * w; ++i) {
            masks.mutable_data()[f * h * w + i] = fr.mask[std::size_t(i)];
            prob.mutable_data()[f * h * w + i] = fr.probability[std::size_t(i)];
        }
    }
    py::list seeds;
    for (std::size_t i = 0; i < r.foreground_seed_pixels.size(); ++i) {
        const PixelIndex p = r.foreground_seed_pixels[i];
        seeds.append(py::make_tuple(r.track_frames.at(i), p / seq.width(), p % seq.width()));
    }
    py::dict out;
    out["masks"] = masks;
    out["probabilities"] = prob;
    out["selected_track"] = r.selected_track ? py::object(py::int_(*r.selected_track)) : py::object(py::none());
    out["track_scores"] = r.track_scores;
    out["foreground_seeds"] = seeds;
    out["diagnostics"] = r.diagnostics;
    out["timings"] = r.timings;
    out["config"] = cli::config_to_json(config).dump();
    return out;
}

}  // namespace

PYBIND11_MODULE(_seedvos, m) {
    m.doc() = "Primary-object video segmentation from dense per-frame features";

    static py::exception<Error> base(m, "SeedvosError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const std::string msg = std::string(to_string(e.code())) + ": " + e.what();
            if (e.code() == ErrorCode::FileNotFound) PyErr_SetString(PyExc_FileNotFoundError, msg.c_str());
            else if (e.is_input_error()) PyErr_SetString(PyExc_ValueError, msg.c_str());
            else py::set_error(base, msg.c_str());
        }
    });

    m.def("set_max_threads", &set_max_threads, py::arg("n"));

    m.def("load_tensor", [](const fs::path& p) { return to_array(load_tensor(p)); }, py::arg("path"));
    m.def("save_tensor", [](const FloatArray& a, const fs::path& p) { save_tensor(to_map(a), p); }, py::arg("array"),
          py::arg("path"));
    m.def("encode_tensor", [](const FloatArray& a) { return py::bytes(encode_tensor(to_map(a))); }, py::arg("array"));
    m.def("decode_tensor", [](const py::bytes& b) { return to_array(parse_tensor(std::string(b))); }, py::arg("data"));
    m.def("load_mask", [](const fs::path& p) { return to_array(load_mask(p)); }, py::arg("path"));
    m.def("save_mask", [](const py::array_t<bool, py::array::c_style | py::array::forcecast>& a, const fs::path& p) {
        save_mask(to_mask(a), p);
    }, py::arg("mask"), py::arg("path"));

    m.def("similarity", [](const std::vector<float>& a, const std::vector<float>& b) { return similarity(a, b); },
          py::arg("a"), py::arg("b"));
    m.def("edge_map", [](const FloatArray& e) { return to_array(edge_map(to_map(e))); }, py::arg("embedding"));
    m.def("candidate_points", [](const FloatArray& edges, std::size_t window) {
        return candidate_points(to_map(edges), window);
    }, py::arg("edges"), py::arg("window") = 9);
    m.def("sample_diverse_seeds", [](const std::vector<std::size_t>& cand, const FloatArray& emb, const FloatArray& obj,
                                     std::size_t count) {
        return sample_diverse_seeds(cand, to_map(emb), to_map(obj), count).pixels();
    }, py::arg("candidates"), py::arg("embedding"), py::arg("objectness"), py::arg("count"));

    m.def("assign_regions", [](const FloatArray& emb, const std::vector<std::size_t>& seeds) {
        const DenseMap e = to_map(emb);
        const RegionLabeling r = assign_regions(PixelGraph::from_embeddings(e), seeds);
        py::array_t<std::int32_t> labels({py::ssize_t(r.height), py::ssize_t(r.width)});
        py::array_t<double> dist({py::ssize_t(r.height), py::ssize_t(r.width)});
        std::copy(r.labels.begin(), r.labels.end(), labels.mutable_data());
        std::copy(r.distance.begin(), r.distance.end(), dist.mutable_data());
        return py::make_tuple(labels, dist);
    }, py::arg("embedding"), py::arg("seeds"));
    m.def("bottleneck_distances", [](const FloatArray& emb, const std::vector<std::size_t>& sources) {
        return to_array(bottleneck_distances(PixelGraph::from_embeddings(to_map(emb)), sources));
    }, py::arg("embedding"), py::arg("sources"));

    m.def("crf_refine", [](const FloatArray& prob, const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& rgb,
                           int iterations, double smoothness_weight, double smoothness_sxy, double appearance_weight,
                           double appearance_sxy, double appearance_srgb) {
        CrfParams p;
        p.iterations = iterations;
        p.smoothness_weight = smoothness_weight;
        p.smoothness_sxy = smoothness_sxy;
        p.appearance_weight = appearance_weight;
        p.appearance_sxy = appearance_sxy;
        p.appearance_srgb = appearance_srgb;
        const CrfResult r = refine(to_map(prob), to_rgb(rgb), p);
        return py::make_tuple(to_array(r.mask), to_array(r.posterior));
    }, py::arg("probability"), py::arg("rgb"), py::arg("iterations") = 10, py::arg("smoothness_weight") = 3.0,
       py::arg("smoothness_sxy") = 3.0, py::arg("appearance_weight") = 4.0, py::arg("appearance_sxy") = 60.0,
       py::arg("appearance_srgb") = 5.0);

    m.def("region_similarity", [](const py::array_t<bool>& p, const py::array_t<bool>& g) {
        return region_similarity(to_mask(p), to_mask(g));
    }, py::arg("pred"), py::arg("gt"));
    m.def("boundary_measure", [](const py::array_t<bool>& p, const py::array_t<bool>& g, double tol) {
        const BinaryMask a = to_mask(p);
        return boundary_measure(a, to_mask(g), tol > 0 ? tol : default_boundary_tolerance(a.height(), a.width()));
    }, py::arg("pred"), py::arg("gt"), py::arg("tolerance") = 0.0);

    m.def("default_config", [] { return cli::config_to_json(PipelineConfig{}).dump(); });
    m.def("segment", &segment, py::arg("manifest"), py::arg("config") = "", py::arg("mode") = "unsupervised");
    m.def("synthesize", [](const std::string& preset, const fs::path& out, std::uint64_t seed, std::size_t frames) {
        synthetic::SceneSpec spec = synthetic::preset(preset, seed);
        if (frames > 0) spec.frames = frames;
        fs::create_directories(out);
        return synthetic::write_sequence(synthetic::generate_sequence(spec), out);
    }, py::arg("preset"), py::arg("out_dir"), py::arg("seed") = 7, py::arg("frames") = 0);
}
