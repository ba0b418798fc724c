#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rbmfeat/features.hpp"
#include "rbmfeat/io.hpp"
#include "rbmfeat/models.hpp"
#include "rbmfeat/oracle.hpp"
#include "rbmfeat/training.hpp"

namespace py = pybind11;
using namespace rbmf;

PYBIND11_MODULE(_core, m) {
    m.doc() = "RBM/GRBM/MGRBM training and feature extraction";

    py::class_<Rng>(m, "Rng")
        .def(py::init<std::uint64_t>(), py::arg("seed"));

    py::class_<RbmParams>(m, "RbmParams")
        .def(py::init<>())
        .def(py::init([](Mat w, Vec a, Vec b) {
                 return RbmParams{std::move(w), std::move(a), std::move(b)};
             }),
             py::arg("W"), py::arg("a"), py::arg("b"))
        .def_readwrite("W", &RbmParams::W)
        .def_readwrite("a", &RbmParams::a)
        .def_readwrite("b", &RbmParams::b)
        .def_property_readonly("nv", &RbmParams::nv)
        .def_property_readonly("nh", &RbmParams::nh);

    py::class_<GrbmParams>(m, "GrbmParams")
        .def(py::init<>())
        .def(py::init([](Mat w, Vec a, Vec b, Vec sigma) {
                 return GrbmParams{std::move(w), std::move(a), std::move(b),
                                   std::move(sigma)};
             }),
             py::arg("W"), py::arg("a"), py::arg("b"), py::arg("sigma"))
        .def_readwrite("W", &GrbmParams::W)
        .def_readwrite("a", &GrbmParams::a)
        .def_readwrite("b", &GrbmParams::b)
        .def_readwrite("sigma", &GrbmParams::sigma)
        .def_property_readonly("nv", &GrbmParams::nv)
        .def_property_readonly("nh", &GrbmParams::nh);

    py::class_<MgrbmParams>(m, "MgrbmParams")
        .def(py::init<>())
        .def_readwrite("nv", &MgrbmParams::nv)
        .def_readwrite("d", &MgrbmParams::d)
        .def_readwrite("nh", &MgrbmParams::nh)
        .def_readwrite("mu", &MgrbmParams::mu)
        .def_readwrite("B", &MgrbmParams::B)
        .def_readwrite("W", &MgrbmParams::W)
        .def_readwrite("b", &MgrbmParams::b);

    m.def("visible_dim", &visible_dim);
    m.def("hidden_dim", &hidden_dim);
    m.def("model_kind", &model_kind);
    m.def("validate", &validate, py::arg("model"),
          py::arg("det_floor") = 1e-12);
    m.def("energy", &energy);
    m.def("hidden_preactivation", &hidden_preactivation);
    m.def("hidden_posterior", &hidden_posterior);
    m.def("free_energy", &free_energy);
    m.def("mgrbm_from_grbm", &mgrbm_from_grbm);
    m.def("sample_hidden", &sample_hidden);
    m.def("sample_visible", &sample_visible);
    m.def("gibbs_sweep", &gibbs_sweep);
    m.def("hidden_posterior_batch", &hidden_posterior_batch);
    m.def("sample_visible_batch", &sample_visible_batch);

    py::enum_<Algo>(m, "Algo")
        .value("CD", Algo::CD)
        .value("PCD", Algo::PCD);
    py::enum_<BNorm>(m, "BNorm")
        .value("TraceD", BNorm::TraceD)
        .value("TraceOne", BNorm::TraceOne)
        .value("Off", BNorm::Off);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("algorithm", &TrainConfig::algorithm)
        .def_readwrite("cd_k", &TrainConfig::cd_k)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("lr_weights", &TrainConfig::lr_weights)
        .def_readwrite("lr_biases", &TrainConfig::lr_biases)
        .def_readwrite("lr_b_factors", &TrainConfig::lr_b_factors)
        .def_readwrite("momentum", &TrainConfig::momentum)
        .def_readwrite("particle_count", &TrainConfig::particle_count)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("b_normalization", &TrainConfig::b_normalization)
        .def_readwrite("legacy_b_sign", &TrainConfig::legacy_b_sign);

    py::class_<EpochRecord>(m, "EpochRecord")
        .def_readonly("epoch", &EpochRecord::epoch)
        .def_readonly("recon_error", &EpochRecord::recon_error)
        .def_readonly("grad_norm_weights", &EpochRecord::grad_norm_weights)
        .def_readonly("grad_norm_biases", &EpochRecord::grad_norm_biases)
        .def_readonly("grad_norm_b_factors", &EpochRecord::grad_norm_b_factors)
        .def_readonly("max_trace_deviation", &EpochRecord::max_trace_deviation)
        .def_readonly("exact_loglik", &EpochRecord::exact_loglik);

    // the variant caster copies the model in, so return the trained copy
    m.def(
        "train",
        [](ModelParams model, const Mat& dataset, const TrainConfig& cfg,
           std::uint64_t seed) {
            Rng rng(seed);
            TrainHistory hist = train(model, dataset, cfg, rng);
            return py::make_tuple(model, hist.epochs);
        },
        py::arg("model"), py::arg("dataset"), py::arg("config"),
        py::arg("seed"));

    m.def("exact_log_partition", &oracle::exact_log_partition);
    m.def("exact_loglik", &oracle::exact_loglik);
    m.def(
        "sample_dataset",
        [](const ModelParams& model, int n, int burn_in, int thin,
           std::uint64_t seed) {
            Rng rng(seed);
            return oracle::sample_dataset(model, n, burn_in, thin, rng);
        },
        py::arg("model"), py::arg("n"), py::arg("burn_in") = 500,
        py::arg("thin") = 2, py::arg("seed") = 0);

    py::enum_<Layout>(m, "Layout")
        .value("Flat", Layout::Flat)
        .value("Block", Layout::Block);
    py::enum_<EdgePolicy>(m, "EdgePolicy")
        .value("Replicate", EdgePolicy::Replicate)
        .value("ZeroPad", EdgePolicy::ZeroPad)
        .value("Drop", EdgePolicy::Drop);

    py::class_<StackSpec>(m, "StackSpec")
        .def(py::init<>())
        .def(py::init([](int context, Layout layout, EdgePolicy edge) {
                 return StackSpec{context, layout, edge};
             }),
             py::arg("context") = 9, py::arg("layout") = Layout::Flat,
             py::arg("edge") = EdgePolicy::Replicate)
        .def_readwrite("context", &StackSpec::context)
        .def_readwrite("layout", &StackSpec::layout)
        .def_readwrite("edge", &StackSpec::edge);

    m.def("stack_context", &stack_context);

    py::class_<NormStats>(m, "NormStats")
        .def(py::init<>())
        .def_readwrite("mean", &NormStats::mean)
        .def_readwrite("stddev", &NormStats::stddev);
    m.def("fit_normalizer", &fit_normalizer);
    m.def("apply_normalizer", &apply_normalizer);

    m.def("extract", &extract);

    py::class_<PcaModel>(m, "PcaModel")
        .def(py::init<>())
        .def_readwrite("mean", &PcaModel::mean)
        .def_readwrite("components", &PcaModel::components)
        .def_readwrite("eigenvalues", &PcaModel::eigenvalues)
        .def_readwrite("coverage", &PcaModel::coverage);
    m.def("pca_fit", &pca_fit);
    m.def("pca_apply", &pca_apply);

    m.def("read_frames",
          [](const std::string& path) { return io::read_frames(path).data; });
    m.def("write_frames", &io::write_frames);

    py::class_<io::ModelFile>(m, "ModelFile")
        .def(py::init<>())
        .def_readwrite("schema_version", &io::ModelFile::schema_version)
        .def_readwrite("params", &io::ModelFile::params)
        .def_readwrite("stack", &io::ModelFile::stack)
        .def_readwrite("norm", &io::ModelFile::norm)
        .def_property(
            "provenance",
            [](const io::ModelFile& mf) {
                return py::module_::import("json").attr("loads")(
                    mf.provenance.dump());
            },
            [](io::ModelFile& mf, const py::object& obj) {
                mf.provenance = nlohmann::json::parse(
                    py::module_::import("json")
                        .attr("dumps")(obj)
                        .cast<std::string>());
            });
    m.def("save_model", &io::save_model);
    m.def("load_model", &io::load_model);
    m.def("save_pca", &io::save_pca);
    m.def("load_pca", &io::load_pca);
}
