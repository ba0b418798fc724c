#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rbmfeat/features.hpp"
#include "rbmfeat/io.hpp"
#include "rbmfeat/models.hpp"
#include "rbmfeat/oracle.hpp"
#include "rbmfeat/training.hpp"

namespace {

using namespace rbmf;

ModelParams init_model(const std::string& kind, int visible, int hidden,
                       int unit_dim, Rng& rng) {
    std::normal_distribution<double> small(0.0, 0.01);
    if (kind == "rbm") {
        RbmParams p;
        p.W = Mat::NullaryExpr(visible, hidden, [&] { return small(rng); });
        p.a = Vec::Zero(visible);
        p.b = Vec::Zero(hidden);
        return p;
    }
    if (kind == "grbm") {
        GrbmParams p;
        p.W = Mat::NullaryExpr(visible, hidden, [&] { return small(rng); });
        p.a = Vec::Zero(visible);
        p.b = Vec::Zero(hidden);
        p.sigma = Vec::Ones(visible);
        return p;
    }
    MgrbmParams p;
    p.nv = visible / unit_dim;
    p.d = unit_dim;
    p.nh = hidden;
    p.b = Vec::Zero(hidden);
    for (int i = 0; i < p.nv; ++i) {
        p.mu.push_back(Vec::Zero(p.d));
        p.B.push_back(Mat::Identity(p.d, p.d));
        p.W.push_back(
            Mat::NullaryExpr(p.d, hidden, [&] { return small(rng); }));
    }
    return p;
}

ModelParams random_generating_model(const std::string& kind, int dim,
                                    int hidden, int unit_dim, Rng& rng) {
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::uniform_real_distribution<double> u_small(-0.3, 0.3);
    if (kind == "rbm") {
        RbmParams p;
        p.W = Mat::NullaryExpr(dim, hidden, [&] { return u(rng); });
        p.a = Vec::NullaryExpr(dim, [&] { return u(rng); });
        p.b = Vec::NullaryExpr(hidden, [&] { return u(rng); });
        return p;
    }
    if (kind == "grbm") {
        GrbmParams p;
        p.W = Mat::NullaryExpr(dim, hidden, [&] { return u(rng); });
        p.a = Vec::NullaryExpr(dim, [&] { return u(rng); });
        p.b = Vec::NullaryExpr(hidden, [&] { return u(rng); });
        p.sigma = Vec::Ones(dim);
        return p;
    }
    MgrbmParams p;
    p.nv = dim / unit_dim;
    p.d = unit_dim;
    p.nh = hidden;
    p.b = Vec::NullaryExpr(hidden, [&] { return u(rng); });
    for (int i = 0; i < p.nv; ++i) {
        p.mu.push_back(Vec::NullaryExpr(p.d, [&] { return u(rng); }));
        Mat b_i = Mat::Identity(p.d, p.d);
        for (int r = 0; r < p.d; ++r) {
            for (int c = 0; c < p.d; ++c) {
                if (r != c) b_i(r, c) = u_small(rng);
            }
        }
        p.B.push_back(b_i);
        p.W.push_back(
            Mat::NullaryExpr(p.d, hidden, [&] { return u_small(rng); }));
    }
    return p;
}

// Stack raw frames per the model's embedded spec and re-apply the stored
// normalization; errors out on any dimension mismatch.
Mat prepare_input(const io::ModelFile& mf, const Mat& frames) {
    const int expected_dim = visible_dim(mf.params);
    if (expected_dim % mf.stack.context != 0 ||
        expected_dim / mf.stack.context != frames.cols()) {
        throw std::runtime_error(
            "frame dimension " + std::to_string(frames.cols()) +
            " does not match model (expects " +
            std::to_string(expected_dim / mf.stack.context) +
            " coefficients per frame at context " +
            std::to_string(mf.stack.context) + ")");
    }
    const Mat stacked = stack_context(frames, mf.stack);
    return apply_normalizer(mf.norm, stacked);
}

BNorm parse_bnorm(const std::string& s) {
    if (s == "trace_d") return BNorm::TraceD;
    if (s == "trace_1") return BNorm::TraceOne;
    if (s == "off") return BNorm::Off;
    throw std::runtime_error("unknown b-normalization mode: " + s);
}

int run(int argc, char** argv) {
    CLI::App app{"RBM-family feature learning toolkit"};
    app.require_subcommand(1);

    // ---- train ----
    auto* train_cmd = app.add_subcommand("train", "train a model on frames");
    std::string t_kind, t_frames, t_out, t_algo = "pcd", t_bnorm = "trace_d";
    std::string t_edge = "replicate";
    int t_context = 9, t_hidden = 1024, t_cdk = 1, t_epochs = 400,
        t_batch = 128, t_particles = 0;
    double t_lr = 1e-3, t_lr_b = 1e-4, t_momentum = 0.0;
    std::uint64_t t_seed = 0;
    train_cmd->add_option("--model", t_kind, "rbm|grbm|mgrbm")
        ->required()
        ->check(CLI::IsMember({"rbm", "grbm", "mgrbm"}));
    train_cmd->add_option("--frames", t_frames, "input frame file")->required();
    train_cmd->add_option("--out", t_out, "output model file")->required();
    train_cmd->add_option("--context", t_context, "context window length");
    train_cmd->add_option("--hidden", t_hidden, "hidden unit count");
    train_cmd->add_option("--algo", t_algo, "cd|pcd")
        ->check(CLI::IsMember({"cd", "pcd"}));
    train_cmd->add_option("--cd-k", t_cdk, "CD Gibbs steps");
    train_cmd->add_option("--epochs", t_epochs, "training epochs");
    train_cmd->add_option("--batch", t_batch, "mini-batch size");
    train_cmd->add_option("--lr", t_lr, "learning rate for weights and biases");
    train_cmd->add_option("--lr-b", t_lr_b, "learning rate for MGRBM B_i");
    train_cmd->add_option("--momentum", t_momentum, "momentum coefficient");
    train_cmd->add_option("--particles", t_particles,
                          "PCD fantasy particles (0 = batch size)");
    train_cmd->add_option("--seed", t_seed, "rng seed");
    train_cmd->add_option("--b-norm", t_bnorm, "trace_d|trace_1|off");
    train_cmd->add_option("--edge", t_edge, "replicate|zero_pad|drop");

    // ---- extract ----
    auto* extract_cmd =
        app.add_subcommand("extract", "extract hidden-posterior features");
    std::string e_model, e_frames, e_out;
    extract_cmd->add_option("--model", e_model)->required();
    extract_cmd->add_option("--frames", e_frames)->required();
    extract_cmd->add_option("--out", e_out)->required();

    // ---- pca-fit ----
    auto* pcafit_cmd = app.add_subcommand("pca-fit", "fit PCA on features");
    std::string pf_features, pf_out;
    int pf_dim = 39;
    pcafit_cmd->add_option("--features", pf_features)->required();
    pcafit_cmd->add_option("--dim", pf_dim, "output dimension");
    pcafit_cmd->add_option("--out", pf_out)->required();

    // ---- pca-apply ----
    auto* pcaapply_cmd = app.add_subcommand("pca-apply", "project features");
    std::string pa_pca, pa_features, pa_out;
    pcaapply_cmd->add_option("--pca", pa_pca)->required();
    pcaapply_cmd->add_option("--features", pa_features)->required();
    pcaapply_cmd->add_option("--out", pa_out)->required();

    // ---- synth ----
    auto* synth_cmd =
        app.add_subcommand("synth", "sample synthetic frames from a random model");
    std::string s_kind = "grbm", s_out;
    int s_dim = 39, s_hidden = 8, s_unit = 3, s_n = 1000, s_burn = 100,
        s_thin = 1;
    std::uint64_t s_seed = 0;
    synth_cmd->add_option("--kind", s_kind, "rbm|grbm|mgrbm")
        ->check(CLI::IsMember({"rbm", "grbm", "mgrbm"}));
    synth_cmd->add_option("--dim", s_dim, "frame dimension");
    synth_cmd->add_option("--hidden", s_hidden, "hidden units of generator");
    synth_cmd->add_option("--unit-dim", s_unit, "mgrbm unit dimension");
    synth_cmd->add_option("--n", s_n, "number of frames");
    synth_cmd->add_option("--burn-in", s_burn, "Gibbs burn-in sweeps");
    synth_cmd->add_option("--thin", s_thin, "keep every thin-th sweep");
    synth_cmd->add_option("--seed", s_seed, "rng seed");
    synth_cmd->add_option("--out", s_out)->required();

    // ---- loglik ----
    auto* loglik_cmd =
        app.add_subcommand("loglik", "exact mean log-likelihood (desk scale)");
    std::string l_model, l_frames;
    loglik_cmd->add_option("--model", l_model)->required();
    loglik_cmd->add_option("--frames", l_frames)->required();

    // ---- inspect ----
    auto* inspect_cmd = app.add_subcommand("inspect", "describe a file");
    std::string i_path;
    inspect_cmd->add_option("path", i_path, "model, pca, or frame file")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // usage error
    }

    if (train_cmd->parsed()) {
        const FrameMatrix frames = io::read_frames(t_frames);
        StackSpec spec;
        spec.context = t_context;
        spec.layout = t_kind == "mgrbm" ? Layout::Block : Layout::Flat;
        spec.edge = io::parse_edge_policy(t_edge);
        const Mat stacked = stack_context(frames.data, spec);

        NormStats norm;
        Mat data;
        if (t_kind == "rbm") {
            if (!((stacked.array() == 0.0) || (stacked.array() == 1.0)).all()) {
                throw std::runtime_error(
                    "rbm training requires binary {0,1} frames");
            }
            norm.mean = Vec::Zero(stacked.cols());
            norm.stddev = Vec::Ones(stacked.cols());
            data = stacked;
        } else {
            norm = fit_normalizer(stacked);
            data = apply_normalizer(norm, stacked);
        }

        Rng rng(t_seed);
        ModelParams model = init_model(
            t_kind, static_cast<int>(stacked.cols()), t_hidden,
            t_kind == "mgrbm" ? t_context : 1, rng);

        TrainConfig cfg;
        cfg.algorithm = t_algo == "cd" ? Algo::CD : Algo::PCD;
        cfg.cd_k = t_cdk;
        cfg.batch_size = t_batch;
        cfg.epochs = t_epochs;
        cfg.lr_weights = t_lr;
        cfg.lr_biases = t_lr;
        cfg.lr_b_factors = t_lr_b;
        cfg.momentum = t_momentum;
        cfg.particle_count = t_particles;
        cfg.seed = t_seed;
        cfg.b_normalization = parse_bnorm(t_bnorm);

        const TrainHistory history = train(model, data, cfg, rng);

        io::ModelFile mf;
        mf.params = std::move(model);
        mf.stack = spec;
        mf.norm = norm;
        mf.provenance = {{"algo", t_algo},
                         {"cd_k", t_cdk},
                         {"epochs", t_epochs},
                         {"batch", t_batch},
                         {"lr", t_lr},
                         {"lr_b", t_lr_b},
                         {"momentum", t_momentum},
                         {"particles", t_particles},
                         {"seed", t_seed},
                         {"b_norm", t_bnorm},
                         {"frames", t_frames}};
        io::save_model(t_out, mf);
        if (!history.epochs.empty()) {
            std::printf("trained %zu epochs, final recon error %.6f\n",
                        history.epochs.size(),
                        history.epochs.back().recon_error);
        }
        std::printf("model written to %s\n", t_out.c_str());
        return 0;
    }

    if (extract_cmd->parsed()) {
        const io::ModelFile mf = io::load_model(e_model);
        const FrameMatrix frames = io::read_frames(e_frames);
        const Mat input = prepare_input(mf, frames.data);
        const Mat features = extract(mf.params, input);
        io::write_frames(e_out, features);
        std::printf("wrote %ld x %ld features to %s\n",
                    static_cast<long>(features.rows()),
                    static_cast<long>(features.cols()), e_out.c_str());
        return 0;
    }

    if (pcafit_cmd->parsed()) {
        const FrameMatrix features = io::read_frames(pf_features);
        const PcaModel pca = pca_fit(features.data, pf_dim);
        io::save_pca(pf_out, pca);
        std::printf("coverage: %.1f%%\n", 100.0 * pca.coverage);
        return 0;
    }

    if (pcaapply_cmd->parsed()) {
        const PcaModel pca = io::load_pca(pa_pca);
        const FrameMatrix features = io::read_frames(pa_features);
        io::write_frames(pa_out, pca_apply(pca, features.data));
        return 0;
    }

    if (synth_cmd->parsed()) {
        if (s_kind == "mgrbm" && s_dim % s_unit != 0) {
            throw std::runtime_error("--unit-dim must divide --dim");
        }
        Rng rng(s_seed);
        const ModelParams gen =
            random_generating_model(s_kind, s_dim, s_hidden, s_unit, rng);
        const Mat samples = oracle::sample_dataset(gen, s_n, s_burn, s_thin, rng);
        io::write_frames(s_out, samples);
        std::printf("wrote %d x %d frames to %s\n", s_n, s_dim, s_out.c_str());
        return 0;
    }

    if (loglik_cmd->parsed()) {
        const io::ModelFile mf = io::load_model(l_model);
        const FrameMatrix frames = io::read_frames(l_frames);
        const Mat input = prepare_input(mf, frames.data);
        const double ll = oracle::exact_loglik(mf.params, input);
        std::printf("mean log-likelihood: %.10f\n", ll);
        return 0;
    }

    if (inspect_cmd->parsed()) {
        std::ifstream probe(i_path, std::ios::binary);
        if (!probe) throw std::runtime_error("cannot open: " + i_path);
        char first = 0;
        probe.get(first);
        probe.close();
        if (first == '{') {
            std::ifstream in(i_path);
            nlohmann::json j;
            in >> j;
            if (j.contains("params")) j.erase("params");
            for (const char* blob : {"mean", "components", "eigenvalues"}) {
                if (j.contains(blob)) j.erase(blob);
            }
            std::cout << j.dump(2) << "\n";
        } else {
            const FrameMatrix fm = io::read_frames(i_path);
            std::printf("frame file: %ld frames x %ld dims\n",
                        static_cast<long>(fm.data.rows()),
                        static_cast<long>(fm.data.cols()));
        }
        return 0;
    }

    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "ERROR: " << e.what() << "\n";
        return 1;
    }
}
