#include "rbmfeat/io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rbmf {
namespace io {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) {
    throw std::runtime_error(msg);
}

std::uint32_t crc32(const std::string& data) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) {
                c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            }
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t c = 0xFFFFFFFFu;
    for (unsigned char byte : data) {
        c = table[(c ^ byte) & 0xFFu] ^ (c >> 8);
    }
    return c ^ 0xFFFFFFFFu;
}

const char kB64Chars[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string b64_encode(const unsigned char* data, std::size_t len) {
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (std::size_t i = 0; i < len; i += 3) {
        std::uint32_t chunk = data[i] << 16;
        if (i + 1 < len) chunk |= data[i + 1] << 8;
        if (i + 2 < len) chunk |= data[i + 2];
        out.push_back(kB64Chars[(chunk >> 18) & 63]);
        out.push_back(kB64Chars[(chunk >> 12) & 63]);
        out.push_back(i + 1 < len ? kB64Chars[(chunk >> 6) & 63] : '=');
        out.push_back(i + 2 < len ? kB64Chars[chunk & 63] : '=');
    }
    return out;
}

std::vector<unsigned char> b64_decode(const std::string& text) {
    std::array<int, 256> rev;
    rev.fill(-1);
    for (int i = 0; i < 64; ++i) rev[static_cast<unsigned char>(kB64Chars[i])] = i;
    std::vector<unsigned char> out;
    std::uint32_t chunk = 0;
    int bits = 0;
    for (char ch : text) {
        if (ch == '=' || ch == '\n' || ch == '\r') continue;
        const int val = rev[static_cast<unsigned char>(ch)];
        if (val < 0) fail("invalid base64 payload");
        chunk = (chunk << 6) | static_cast<std::uint32_t>(val);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<unsigned char>((chunk >> bits) & 0xFFu));
        }
    }
    return out;
}

std::string encode_doubles(const double* data, std::size_t count) {
    return b64_encode(reinterpret_cast<const unsigned char*>(data),
                      count * sizeof(double));
}

std::string encode_mat(const Mat& m) {
    // row-major on disk
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm =
        m;
    return encode_doubles(rm.data(), static_cast<std::size_t>(rm.size()));
}

std::string encode_vec(const Vec& v) {
    return encode_doubles(v.data(), static_cast<std::size_t>(v.size()));
}

std::vector<double> decode_doubles(const std::string& text,
                                   std::size_t expected) {
    const auto bytes = b64_decode(text);
    if (bytes.size() != expected * sizeof(double)) {
        fail("parameter block has wrong length");
    }
    std::vector<double> out(expected);
    std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

Mat decode_mat(const std::string& text, int rows, int cols) {
    const auto vals =
        decode_doubles(text, static_cast<std::size_t>(rows) * cols);
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) m(r, c) = vals[r * cols + c];
    }
    return m;
}

Vec decode_vec(const std::string& text, int size) {
    const auto vals = decode_doubles(text, static_cast<std::size_t>(size));
    return Eigen::Map<const Vec>(vals.data(), size);
}

std::string checksum_of(json j) {
    j.erase("checksum");
    std::ostringstream os;
    os << std::hex << crc32(j.dump());
    return os.str();
}

void write_checked_json(const std::string& path, json j) {
    j["checksum"] = checksum_of(j);
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
    if (!out) fail("write failed: " + path);
}

json read_checked_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail("malformed model file " + path + ": " + e.what());
    }
    if (!j.contains("checksum")) fail("missing checksum: " + path);
    const std::string stored = j["checksum"];
    if (stored != checksum_of(j)) {
        fail("checksum mismatch (corrupt or truncated file): " + path);
    }
    return j;
}

}  // namespace

std::string layout_name(Layout l) {
    return l == Layout::Flat ? "flat" : "block";
}

Layout parse_layout(const std::string& s) {
    if (s == "flat") return Layout::Flat;
    if (s == "block") return Layout::Block;
    fail("unknown layout: " + s);
}

std::string edge_policy_name(EdgePolicy e) {
    switch (e) {
        case EdgePolicy::Replicate: return "replicate";
        case EdgePolicy::ZeroPad: return "zero_pad";
        default: return "drop";
    }
}

EdgePolicy parse_edge_policy(const std::string& s) {
    if (s == "replicate") return EdgePolicy::Replicate;
    if (s == "zero_pad") return EdgePolicy::ZeroPad;
    if (s == "drop") return EdgePolicy::Drop;
    fail("unknown edge policy: " + s);
}

FrameMatrix read_frames(const std::string& path) {
    FrameMatrix fm;
    fm.source = path;
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
        std::ifstream in(path);
        if (!in) fail("cannot open: " + path);
        std::vector<std::vector<double>> rows;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::vector<double> row;
            std::size_t pos = 0;
            while (pos < line.size()) {
                std::size_t next = line.find(',', pos);
                if (next == std::string::npos) next = line.size();
                const std::string tok = line.substr(pos, next - pos);
                try {
                    row.push_back(std::stod(tok));
                } catch (const std::exception&) {
                    fail("bad CSV value '" + tok + "' in " + path);
                }
                pos = next + 1;
            }
            if (!rows.empty() && row.size() != rows.front().size()) {
                fail("ragged CSV rows in " + path);
            }
            rows.push_back(std::move(row));
        }
        if (rows.empty()) fail("empty frame matrix: " + path);
        fm.data.resize(static_cast<int>(rows.size()),
                       static_cast<int>(rows.front().size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (std::size_t c = 0; c < rows[r].size(); ++c) {
                fm.data(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
            }
        }
    } else {
        std::ifstream in(path, std::ios::binary);
        if (!in) fail("cannot open: " + path);
        char magic[4];
        std::uint32_t version = 0, t = 0, d = 0;
        in.read(magic, 4);
        in.read(reinterpret_cast<char*>(&version), 4);
        in.read(reinterpret_cast<char*>(&t), 4);
        in.read(reinterpret_cast<char*>(&d), 4);
        if (!in || std::memcmp(magic, "FMAT", 4) != 0) {
            fail("bad magic (not a frame file): " + path);
        }
        if (version != 1) fail("unsupported frame file version: " + path);
        if (t == 0 || d == 0) fail("empty frame matrix: " + path);
        std::vector<float> payload(static_cast<std::size_t>(t) * d);
        in.read(reinterpret_cast<char*>(payload.data()),
                static_cast<std::streamsize>(payload.size() * sizeof(float)));
        if (static_cast<std::size_t>(in.gcount()) !=
            payload.size() * sizeof(float)) {
            fail("payload shorter than declared T*D: " + path);
        }
        fm.data.resize(static_cast<int>(t), static_cast<int>(d));
        for (std::uint32_t r = 0; r < t; ++r) {
            for (std::uint32_t c = 0; c < d; ++c) {
                fm.data(r, c) = payload[static_cast<std::size_t>(r) * d + c];
            }
        }
    }
    for (int r = 0; r < fm.data.rows(); ++r) {
        for (int c = 0; c < fm.data.cols(); ++c) {
            if (!std::isfinite(fm.data(r, c))) {
                std::ostringstream os;
                os << "non-finite value at row " << r << ", col " << c << " in "
                   << path;
                fail(os.str());
            }
        }
    }
    return fm;
}

void write_frames(const std::string& path, const Mat& data) {
    if (data.rows() == 0 || data.cols() == 0) fail("empty frame matrix");
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open for writing: " + path);
    const std::uint32_t version = 1;
    const std::uint32_t t = static_cast<std::uint32_t>(data.rows());
    const std::uint32_t d = static_cast<std::uint32_t>(data.cols());
    out.write("FMAT", 4);
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&t), 4);
    out.write(reinterpret_cast<const char*>(&d), 4);
    std::vector<float> payload(static_cast<std::size_t>(t) * d);
    for (std::uint32_t r = 0; r < t; ++r) {
        for (std::uint32_t c = 0; c < d; ++c) {
            payload[static_cast<std::size_t>(r) * d + c] =
                static_cast<float>(data(r, c));
        }
    }
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(float)));
    if (!out) fail("write failed: " + path);
}

void save_model(const std::string& path, const ModelFile& mf) {
    validate(mf.params);
    json j;
    j["schema_version"] = mf.schema_version;
    j["kind"] = model_kind(mf.params);
    json params;
    json shape;
    if (const auto* p = std::get_if<RbmParams>(&mf.params)) {
        shape = {{"nv", p->nv()}, {"nh", p->nh()}};
        params["W"] = encode_mat(p->W);
        params["a"] = encode_vec(p->a);
        params["b"] = encode_vec(p->b);
    } else if (const auto* g = std::get_if<GrbmParams>(&mf.params)) {
        shape = {{"nv", g->nv()}, {"nh", g->nh()}};
        params["W"] = encode_mat(g->W);
        params["a"] = encode_vec(g->a);
        params["b"] = encode_vec(g->b);
        params["sigma"] = encode_vec(g->sigma);
    } else {
        const auto& p = std::get<MgrbmParams>(mf.params);
        shape = {{"nv", p.nv}, {"d", p.d}, {"nh", p.nh}};
        json mu = json::array(), b_list = json::array(), w_list = json::array();
        for (int i = 0; i < p.nv; ++i) {
            mu.push_back(encode_vec(p.mu[i]));
            b_list.push_back(encode_mat(p.B[i]));
            w_list.push_back(encode_mat(p.W[i]));
        }
        params["mu"] = mu;
        params["B"] = b_list;
        params["W"] = w_list;
        params["b"] = encode_vec(p.b);
    }
    j["shape"] = shape;
    j["params"] = params;
    j["stack"] = {{"context", mf.stack.context},
                  {"layout", layout_name(mf.stack.layout)},
                  {"edge", edge_policy_name(mf.stack.edge)}};
    j["norm"] = {{"mean", encode_vec(mf.norm.mean)},
                 {"stddev", encode_vec(mf.norm.stddev)},
                 {"size", static_cast<int>(mf.norm.mean.size())}};
    j["provenance"] = mf.provenance;
    write_checked_json(path, std::move(j));
}

ModelFile load_model(const std::string& path) {
    const json j = read_checked_json(path);
    ModelFile mf;
    mf.schema_version = j.at("schema_version");
    if (mf.schema_version != 1) {
        fail("unsupported model schema_version in " + path);
    }
    const std::string kind = j.at("kind");
    const json& shape = j.at("shape");
    const json& params = j.at("params");
    try {
        if (kind == "rbm" || kind == "grbm") {
            const int nv = shape.at("nv");
            const int nh = shape.at("nh");
            Mat w = decode_mat(params.at("W"), nv, nh);
            Vec a = decode_vec(params.at("a"), nv);
            Vec b = decode_vec(params.at("b"), nh);
            if (kind == "rbm") {
                mf.params = RbmParams{std::move(w), std::move(a), std::move(b)};
            } else {
                Vec sigma = decode_vec(params.at("sigma"), nv);
                mf.params = GrbmParams{std::move(w), std::move(a), std::move(b),
                                       std::move(sigma)};
            }
        } else if (kind == "mgrbm") {
            MgrbmParams p;
            p.nv = shape.at("nv");
            p.d = shape.at("d");
            p.nh = shape.at("nh");
            p.b = decode_vec(params.at("b"), p.nh);
            const auto& mu = params.at("mu");
            const auto& b_list = params.at("B");
            const auto& w_list = params.at("W");
            if (static_cast<int>(mu.size()) != p.nv ||
                static_cast<int>(b_list.size()) != p.nv ||
                static_cast<int>(w_list.size()) != p.nv) {
                fail("mgrbm parameter lists inconsistent with shape: " + path);
            }
            for (int i = 0; i < p.nv; ++i) {
                p.mu.push_back(decode_vec(mu[i], p.d));
                p.B.push_back(decode_mat(b_list[i], p.d, p.d));
                p.W.push_back(decode_mat(w_list[i], p.d, p.nh));
            }
            mf.params = std::move(p);
        } else {
            fail("unknown model kind '" + kind + "' in " + path);
        }
        validate(mf.params);
    } catch (const json::exception& e) {
        fail("malformed model file " + path + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        fail("inconsistent model shapes in " + path + ": " + e.what());
    }
    const json& stack = j.at("stack");
    mf.stack.context = stack.at("context");
    mf.stack.layout = parse_layout(stack.at("layout"));
    mf.stack.edge = parse_edge_policy(stack.at("edge"));
    const json& norm = j.at("norm");
    const int norm_size = norm.at("size");
    mf.norm.mean = decode_vec(norm.at("mean"), norm_size);
    mf.norm.stddev = decode_vec(norm.at("stddev"), norm_size);
    if (j.contains("provenance")) mf.provenance = j.at("provenance");
    return mf;
}

void save_pca(const std::string& path, const PcaModel& pca) {
    json j;
    j["schema_version"] = 1;
    j["kind"] = "pca";
    j["input_dim"] = static_cast<int>(pca.mean.size());
    j["out_dim"] = static_cast<int>(pca.components.cols());
    j["mean"] = encode_vec(pca.mean);
    j["components"] = encode_mat(pca.components);
    j["eigenvalues"] = encode_vec(pca.eigenvalues);
    j["coverage"] = pca.coverage;
    write_checked_json(path, std::move(j));
}

PcaModel load_pca(const std::string& path) {
    const json j = read_checked_json(path);
    if (j.at("kind") != "pca") fail("not a pca file: " + path);
    PcaModel pca;
    const int input_dim = j.at("input_dim");
    const int out_dim = j.at("out_dim");
    pca.mean = decode_vec(j.at("mean"), input_dim);
    pca.components = decode_mat(j.at("components"), input_dim, out_dim);
    pca.eigenvalues = decode_vec(j.at("eigenvalues"), input_dim);
    pca.coverage = j.at("coverage");
    return pca;
}

}  // namespace io
}  // namespace rbmf
